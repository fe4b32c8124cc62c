#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvdvc/config.hpp"
#include "mvdvc/container.hpp"
#include "mvdvc/simulate.hpp"
#include "mvdvc/synth.hpp"
#include "mvdvc/yuv.hpp"

using namespace mvdvc;

namespace {

// Options shared by the coding subcommands. The config file is applied
// first, then --set pairs, then the typed flags, so later sources win.
struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  int width = 0, height = 0, frames = 0;
  int qp = 0, levels = 0, gop = 0;
  double fps = 0.0;
  std::string feedback, domain;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--set", o.sets, "extra config override, key=value")->expected(-1);
  cmd->add_option("--width", o.width, "luma width");
  cmd->add_option("--height", o.height, "luma height");
  cmd->add_option("--frames", o.frames, "frames per view (0 = from file size)");
  cmd->add_option("--fps", o.fps, "frame rate for kbps reporting");
  cmd->add_option("--qp", o.qp, "KEY intra quantizer index");
  cmd->add_option("--levels", o.levels, "pixel-domain quantizer levels");
  cmd->add_option("--gop", o.gop, "GOP length");
  cmd->add_option("--feedback", o.feedback, "off, simple or smart");
  cmd->add_option("--domain", o.domain, "pixel or transform");
}

CodecConfig resolve_config(const CommonOpts& o) {
  CodecConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + o.config_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    cfg = parse_config(text);
  }
  for (const std::string& kv : o.sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got: " + kv);
    apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.width) cfg.width = o.width;
  if (o.height) cfg.height = o.height;
  if (o.frames) cfg.num_frames = o.frames;
  if (o.fps > 0) cfg.fps = o.fps;
  if (o.qp) cfg.qp = o.qp;
  if (o.levels) cfg.quant.levels = o.levels;
  if (o.gop) cfg.gop_length = o.gop;
  if (!o.feedback.empty()) apply_config_line(cfg, "feedback", o.feedback);
  if (!o.domain.empty()) apply_config_line(cfg, "domain", o.domain);
  return cfg;
}

int yuv_frame_count(const std::string& path, int w, int h) {
  auto bytes = std::filesystem::file_size(path);
  size_t per_frame = size_t(w) * h * 3 / 2;
  return int(bytes / per_frame);
}

MultiViewSequence load_input(const CodecConfig& cfg, const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::runtime_error("no input file given");
  if (cfg.width <= 0 || cfg.height <= 0)
    throw std::runtime_error("input dimensions required (--width/--height or config file)");
  int frames = cfg.num_frames > 0 ? cfg.num_frames
                                  : yuv_frame_count(paths[0], cfg.width, cfg.height);
  return read_yuv_views(paths, cfg.width, cfg.height, frames, cfg.fps);
}

// one output file per view: "dec.yuv" -> "dec.v1.yuv", "dec.v2.yuv"
std::string view_path(const std::string& path, int view, int num_views) {
  if (num_views == 1) return path;
  std::filesystem::path p(path);
  std::string stem = p.stem().string() + ".v" + std::to_string(view);
  return (p.parent_path() / (stem + p.extension().string())).string();
}

void write_views(const std::string& path, const MultiViewSequence& seq) {
  for (int v = 0; v < seq.num_views(); v++) {
    std::string out = view_path(path, v + 1, seq.num_views());
    write_yuv(out, seq.views[size_t(v)]);
    std::printf("wrote %s (%d frames)\n", out.c_str(), int(seq.views[size_t(v)].frames.size()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"spatially interleaved multi-view Wyner-Ziv video codec"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<std::string> inputs;
  std::string out_path, stats_path, recon_path, plot_path, png_path, pattern = "translate";
  SynthParams syn;

  CLI::App* gen = app.add_subcommand("gen", "write a synthetic test sequence");
  gen->add_option("--pattern", pattern,
                  "static, translate, stereo, square, occlusion or mixed");
  gen->add_option("--width", syn.width, "luma width");
  gen->add_option("--height", syn.height, "luma height");
  gen->add_option("--frames", syn.frames, "frames per view");
  gen->add_option("--views", syn.views, "number of views");
  gen->add_option("--seed", syn.seed, "texture seed");
  gen->add_option("--speed", syn.speed, "square speed, px per frame");
  gen->add_option("--square", syn.square, "square side, px");
  gen->add_option("--strip-width", syn.strip_w, "occlusion strip width, px");
  gen->add_option("--disparity", syn.view_disparity, "px shift between views");
  gen->add_option("--dx4", syn.dx4, "global motion, quarter-px per frame");
  gen->add_option("--dy4", syn.dy4, "global motion, quarter-px per frame");
  gen->add_option("-o,--out", out_path, "output path (views > 1 get .vN inserted)")->required();

  CLI::App* enc = app.add_subcommand("encode", "encode YUV input to a bitstream file");
  add_common(enc, opts);
  enc->add_option("-i,--input", inputs, "input YUV, one per view")->required();
  enc->add_option("-o,--out", out_path, "bitstream output")->required();
  enc->add_option("--stats", stats_path, "per-frame stats CSV");

  CLI::App* dec = app.add_subcommand("decode", "decode a bitstream file to YUV");
  dec->add_option("-i,--input", inputs, "bitstream file")->required()->expected(1);
  dec->add_option("-o,--out", out_path, "YUV output path")->required();

  CLI::App* sim = app.add_subcommand("simulate", "full codec run with per-frame stats");
  add_common(sim, opts);
  sim->add_option("-i,--input", inputs, "input YUV, one per view")->required();
  sim->add_option("-o,--out", out_path, "optional bitstream output");
  sim->add_option("--stats", stats_path, "stats CSV (default stdout)");
  sim->add_option("--recon", recon_path, "decoded YUV output");

  CLI::App* sig = app.add_subcommand("sigen", "side-information quality analysis");
  add_common(sig, opts);
  sig->add_option("-i,--input", inputs, "input YUV, one per view")->required();
  sig->add_option("-o,--out", stats_path, "SI CSV (default stdout)");

  CLI::App* rd = app.add_subcommand("rd", "rate-distortion sweep over the standard points");
  add_common(rd, opts);
  rd->add_option("-i,--input", inputs, "input YUV, one per view")->required();
  rd->add_option("-o,--out", stats_path, "RD CSV (default stdout)");
  rd->add_option("--plot", plot_path, "write a gnuplot script next to the CSV");
  rd->add_option("--png", png_path, "plot output name used inside the script");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    MultiViewSequence seq = synth_sequence(pattern, syn);
    write_views(out_path, seq);
    return 0;
  }
  if (dec->parsed()) {
    BitstreamContainer c = read_container_file(inputs[0]);
    write_views(out_path, decode_container(c));
    return 0;
  }

  CodecConfig cfg = resolve_config(opts);
  MultiViewSequence input = load_input(cfg, inputs);

  if (sig->parsed()) {
    std::string csv = si_csv(analyze_si(cfg, input));
    if (stats_path.empty()) std::fputs(csv.c_str(), stdout);
    else write_text(stats_path, csv);
    return 0;
  }
  if (rd->parsed()) {
    std::string csv = rd_csv(rd_sweep(cfg, input));
    if (stats_path.empty()) std::fputs(csv.c_str(), stdout);
    else write_text(stats_path, csv);
    if (!plot_path.empty()) {
      std::string csv_name = stats_path.empty() ? "rd.csv" : stats_path;
      std::string png_name = png_path.empty() ? "rd.png" : png_path;
      write_text(plot_path, rd_gnuplot(csv_name, png_name));
    }
    return 0;
  }

  SimResult res = simulate(cfg, input);
  if (!out_path.empty()) {
    write_container_file(out_path, res.container);
    std::printf("wrote %s (%zu records, %ld bits coded)\n", out_path.c_str(),
                res.container.records.size(), total_bits(res.stats));
  }
  if (enc->parsed() && !stats_path.empty()) write_text(stats_path, stats_csv(res.stats));
  if (sim->parsed()) {
    std::string csv = stats_csv(res.stats);
    if (stats_path.empty()) std::fputs(csv.c_str(), stdout);
    else write_text(stats_path, csv);
    if (!recon_path.empty()) write_views(recon_path, res.decoded);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
