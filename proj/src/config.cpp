#include "mvdvc/config.hpp"

#include <sstream>
#include <stdexcept>

namespace mvdvc {

void CodecConfig::validate() const {
  if (width <= 0 || height <= 0 || width % block_size || height % block_size)
    throw std::invalid_argument("config: dimensions must be positive multiples of block_size");
  if ((width / block_size) % 2)
    throw std::invalid_argument("config: block grid must have an even number of columns");
  if (num_views < 1) throw std::invalid_argument("config: num_views must be >= 1");
  if (gop_length < 2) throw std::invalid_argument("config: gop_length must be >= 2");
  if (qp < 1 || qp > 51) throw std::invalid_argument("config: qp out of range");
  if (puncture_period < 1) throw std::invalid_argument("config: puncture_period must be >= 1");
  if (max_turbo_iters < 1) throw std::invalid_argument("config: max_turbo_iters must be >= 1");
  if (ber_threshold <= 0 || ber_threshold >= 0.5)
    throw std::invalid_argument("config: ber_threshold must be in (0, 0.5)");
  if (si_hypotheses < 1) throw std::invalid_argument("config: si_hypotheses must be >= 1");
  quant.validate();
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

int to_int(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

void apply_config_line(CodecConfig& c, const std::string& key, const std::string& value) {
  if (key == "width") c.width = to_int(value, key);
  else if (key == "height") c.height = to_int(value, key);
  else if (key == "views") c.num_views = to_int(value, key);
  else if (key == "frames") c.num_frames = to_int(value, key);
  else if (key == "fps") c.fps = to_double(value, key);
  else if (key == "block_size") c.block_size = to_int(value, key);
  else if (key == "gop_length") c.gop_length = to_int(value, key);
  else if (key == "order_mode") {
    if (value == "min_distance") c.order_mode = OrderMode::min_distance;
    else if (value == "min_delay") c.order_mode = OrderMode::min_delay;
    else throw std::invalid_argument("config: order_mode must be min_distance or min_delay");
  } else if (key == "qp") c.qp = to_int(value, key);
  else if (key == "domain") {
    if (value == "pixel") c.quant.domain = QuantDomain::pixel;
    else if (value == "transform") c.quant.domain = QuantDomain::transform;
    else throw std::invalid_argument("config: domain must be pixel or transform");
  } else if (key == "levels") c.quant.levels = to_int(value, key);
  else if (key == "quant_table") c.quant.table = to_int(value, key);
  else if (key == "puncture_period") c.puncture_period = to_int(value, key);
  else if (key == "max_turbo_iters") c.max_turbo_iters = to_int(value, key);
  else if (key == "ber_threshold") c.ber_threshold = to_double(value, key);
  else if (key == "interleaver_seed") c.interleaver_seed = to_u64(value, key);
  else if (key == "puncture_seed") c.puncture_seed = to_u64(value, key);
  else if (key == "feedback") {
    if (value == "off") c.feedback = FeedbackMode::off;
    else if (value == "simple") c.feedback = FeedbackMode::simple;
    else if (value == "smart") c.feedback = FeedbackMode::smart;
    else throw std::invalid_argument("config: feedback must be off, simple or smart");
  } else if (key == "feedback_window") c.feedback_window = to_int(value, key);
  else if (key == "simple_block") c.simple_block = to_int(value, key);
  else if (key == "smart_block") c.smart_block = to_int(value, key);
  else if (key == "min_turbo_block") c.min_turbo_block = to_int(value, key);
  else if (key == "frame_subtraction") c.frame_subtraction = to_bool(value, key);
  else if (key == "subtraction_threshold") c.subtraction_threshold = to_int(value, key);
  else if (key == "macroblock_size") c.macroblock_size = to_int(value, key);
  else if (key == "reconstruction") {
    if (value == "paper") c.reconstruction = ReconstructionMode::paper;
    else if (value == "nearest") c.reconstruction = ReconstructionMode::nearest;
    else throw std::invalid_argument("config: reconstruction must be paper or nearest");
  } else if (key == "si_hypotheses") c.si_hypotheses = to_int(value, key);
  else if (key == "search_range") c.si.search_range = to_int(value, key);
  else if (key == "disparity_range_x") c.si.disparity_range_x = to_int(value, key);
  else if (key == "disparity_range_y") c.si.disparity_range_y = to_int(value, key);
  else if (key == "boundary_width") c.si.boundary_width = to_int(value, key);
  else if (key == "fusion") {
    if (value == "sad") c.si.fusion = FusionMethod::sad;
    else if (value == "vector_median") c.si.fusion = FusionMethod::vector_median;
    else if (value == "refine_si") c.si.fusion = FusionMethod::refine_si;
    else if (value == "fusion_refine_si") c.si.fusion = FusionMethod::fusion_refine_si;
    else throw std::invalid_argument("config: unknown fusion method '" + value + "'");
  } else if (key == "median_threshold") c.si.median_threshold = to_double(value, key);
  else if (key == "refine_th") c.si.refine_th = to_double(value, key);
  else if (key == "sec_entropy_threshold") c.si.sec_entropy_threshold = to_double(value, key);
  else if (key == "mda_threshold") c.si.mda_threshold = to_double(value, key);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

CodecConfig parse_config(const std::string& text) {
  CodecConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (size_t h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key=value");
    apply_config_line(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

std::string serialize_config(const CodecConfig& c) {
  std::ostringstream out;
  out << "width = " << c.width << "\n";
  out << "height = " << c.height << "\n";
  out << "views = " << c.num_views << "\n";
  out << "frames = " << c.num_frames << "\n";
  out << "fps = " << c.fps << "\n";
  out << "block_size = " << c.block_size << "\n";
  out << "gop_length = " << c.gop_length << "\n";
  out << "order_mode = " << (c.order_mode == OrderMode::min_distance ? "min_distance" : "min_delay")
      << "\n";
  out << "qp = " << c.qp << "\n";
  out << "domain = " << (c.quant.domain == QuantDomain::pixel ? "pixel" : "transform") << "\n";
  out << "levels = " << c.quant.levels << "\n";
  out << "quant_table = " << c.quant.table << "\n";
  out << "puncture_period = " << c.puncture_period << "\n";
  out << "max_turbo_iters = " << c.max_turbo_iters << "\n";
  out << "ber_threshold = " << c.ber_threshold << "\n";
  out << "interleaver_seed = " << c.interleaver_seed << "\n";
  out << "puncture_seed = " << c.puncture_seed << "\n";
  out << "feedback = "
      << (c.feedback == FeedbackMode::off ? "off"
          : c.feedback == FeedbackMode::simple ? "simple" : "smart")
      << "\n";
  out << "feedback_window = " << c.feedback_window << "\n";
  out << "simple_block = " << c.simple_block << "\n";
  out << "smart_block = " << c.smart_block << "\n";
  out << "min_turbo_block = " << c.min_turbo_block << "\n";
  out << "frame_subtraction = " << (c.frame_subtraction ? "on" : "off") << "\n";
  out << "subtraction_threshold = " << c.subtraction_threshold << "\n";
  out << "macroblock_size = " << c.macroblock_size << "\n";
  out << "reconstruction = "
      << (c.reconstruction == ReconstructionMode::paper ? "paper" : "nearest") << "\n";
  out << "si_hypotheses = " << c.si_hypotheses << "\n";
  out << "search_range = " << c.si.search_range << "\n";
  out << "disparity_range_x = " << c.si.disparity_range_x << "\n";
  out << "disparity_range_y = " << c.si.disparity_range_y << "\n";
  out << "boundary_width = " << c.si.boundary_width << "\n";
  out << "fusion = "
      << (c.si.fusion == FusionMethod::sad ? "sad"
          : c.si.fusion == FusionMethod::vector_median ? "vector_median"
          : c.si.fusion == FusionMethod::refine_si ? "refine_si" : "fusion_refine_si")
      << "\n";
  out << "median_threshold = " << c.si.median_threshold << "\n";
  out << "refine_th = " << c.si.refine_th << "\n";
  out << "sec_entropy_threshold = " << c.si.sec_entropy_threshold << "\n";
  out << "mda_threshold = " << c.si.mda_threshold << "\n";
  return out.str();
}

}  // namespace mvdvc
