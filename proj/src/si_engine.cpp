#include "mvdvc/si_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvdvc {

namespace {

struct CandVec {
  BlockVec v;
  int ref;
};

BlockVec component_median(std::vector<BlockVec>& vs) {
  auto mid = [&](auto get) {
    std::vector<int> c;
    c.reserve(vs.size());
    for (auto& v : vs) c.push_back(get(v));
    std::sort(c.begin(), c.end());
    return c[c.size() / 2];
  };
  return {mid([](const BlockVec& v) { return v.x; }), mid([](const BlockVec& v) { return v.y; })};
}

// integer full search then quarter-pel refinement around the best position
void search_block(const Frame& cur, int x0, int y0, int b, const Frame& ref, int rx, int ry,
                  BlockVec& best_v, long& best_sad) {
  best_v = {0, 0};
  best_sad = block_sad(cur, x0, y0, b, ref, x0 * 4, y0 * 4);
  for (int dy = -ry; dy <= ry; dy++)
    for (int dx = -rx; dx <= rx; dx++) {
      if (dx == 0 && dy == 0) continue;
      long s = block_sad(cur, x0, y0, b, ref, (x0 + dx) * 4, (y0 + dy) * 4);
      if (s < best_sad) {
        best_sad = s;
        best_v = {dx * 4, dy * 4};
      }
    }
  BlockVec center = best_v;
  for (int dy = -3; dy <= 3; dy++)
    for (int dx = -3; dx <= 3; dx++) {
      if (dx == 0 && dy == 0) continue;
      BlockVec v{center.x + dx, center.y + dy};
      long s = block_sad(cur, x0, y0, b, ref, x0 * 4 + v.x, y0 * 4 + v.y);
      if (s < best_sad) {
        best_sad = s;
        best_v = v;
      }
    }
}

void compensate_block(Frame& dst, int x0, int y0, int b, const Frame& ref, BlockVec v) {
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++)
      dst.at(x0 + x, y0 + y) = sample_qpel(ref, (x0 + x) * 4 + v.x, (y0 + y) * 4 + v.y);
}

// raised-cosine weight of a neighbour on that side, d = pixel distance from
// the shared edge in [0, b)
inline double side_weight(int d, int b) {
  return 0.5 * (1.0 + std::cos(M_PI * (d + 0.5) / b));
}

struct NeighbourComp {
  BlockVec v;
  const Frame* ref;
  int side;  // 0 top, 1 left, 2 right, 3 bottom
};

void obmc_blend(Frame& dst, int x0, int y0, int b, const Frame& win_ref, BlockVec win_v,
                const std::vector<NeighbourComp>& neighbours) {
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++) {
      double acc = sample_qpel(win_ref, (x0 + x) * 4 + win_v.x, (y0 + y) * 4 + win_v.y);
      double wsum = 1.0;
      for (const auto& nb : neighbours) {
        int d = nb.side == 0 ? y : nb.side == 1 ? x : nb.side == 2 ? b - 1 - x : b - 1 - y;
        double w = side_weight(d, b);
        acc += w * sample_qpel(*nb.ref, (x0 + x) * 4 + nb.v.x, (y0 + y) * 4 + nb.v.y);
        wsum += w;
      }
      dst.at(x0 + x, y0 + y) = uint8_t(std::clamp(int(std::lround(acc / wsum)), 0, 255));
    }
}

// neighbour KEY cells of (bi, bj) in top/left/right/bottom order
template <typename F>
void for_key_neighbours(const InterleavePattern& p, int bi, int bj, F&& f) {
  const int di[4] = {-1, 0, 0, 1};
  const int dj[4] = {0, -1, 1, 0};
  for (int k = 0; k < 4; k++) {
    int ni = bi + di[k], nj = bj + dj[k];
    if (ni >= 0 && ni < p.grid_h && nj >= 0 && nj < p.grid_w) f(ni, nj, k);
  }
}

// candidate vectors for concealing WZ block (bi,bj): neighbour KEY winners,
// their median, and the zero vector
std::vector<CandVec> conceal_candidates(const InterleavePattern& pat, const MotionField& key_field,
                                        int bi, int bj, int num_refs) {
  std::vector<CandVec> cands;
  std::vector<BlockVec> nb_vecs;
  std::vector<int> nb_refs;
  for_key_neighbours(pat, bi, bj, [&](int ni, int nj, int) {
    int i = key_field.idx(ni, nj);
    if (!key_field.valid[i]) return;
    cands.push_back({key_field.vec[i], key_field.ref[i]});
    nb_vecs.push_back(key_field.vec[i]);
    nb_refs.push_back(key_field.ref[i]);
  });
  if (!nb_vecs.empty()) {
    BlockVec med = component_median(nb_vecs);
    std::sort(nb_refs.begin(), nb_refs.end());
    nb_refs.erase(std::unique(nb_refs.begin(), nb_refs.end()), nb_refs.end());
    for (int r : nb_refs) cands.push_back({med, r});
  }
  for (int r = 0; r < num_refs; r++) cands.push_back({{0, 0}, r});
  return cands;
}

// shared TEC/VEC machinery: estimate KEY field on `refs`, conceal WZ blocks
// by boundary matching over the candidate set, blend with OBMC.
// `score_extra` may add a per-candidate penalty (used by the refinement pass).
template <typename ScoreExtra>
CandidateSI conceal_generic(const ConcealContext& ctx, const std::vector<SiRef>& refs,
                            bool disparity_window, SiMethod method, ScoreExtra&& score_extra) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;

  CandidateSI cand;
  cand.method = method;
  cand.refs = refs;
  cand.prediction = *ctx.current;
  cand.key_field = estimate_key_field(ctx, refs, disparity_window);
  cand.wz_field.init(pat.grid_w, pat.grid_h);
  cand.block_src.assign(size_t(pat.grid_w) * pat.grid_h, method == SiMethod::vec ? 1 : 0);

  // KEY prediction quality, used for ranking the finished hypotheses
  cand.key_prediction = Frame(ctx.current->width, ctx.current->height);
  double err_acc = 0.0;
  long err_n = 0;
  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (!pat.is_key(bi, bj)) continue;
      int i = cand.key_field.idx(bi, bj);
      compensate_block(cand.key_prediction, bj * b, bi * b, b, *refs[cand.key_field.ref[i]].img,
                       cand.key_field.vec[i]);
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) {
          double d = double(cand.key_prediction.at(x, y)) - double(ctx.current->at(x, y));
          err_acc += d * d;
          err_n++;
        }
    }
  cand.key_mse = err_n ? err_acc / double(err_n) : 0.0;

  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (pat.is_key(bi, bj)) continue;
      auto cands = conceal_candidates(pat, cand.key_field, bi, bj, int(refs.size()));
      double best_score = 0.0, best_err = 0.0;
      CandVec best{{0, 0}, 0};
      bool first = true;
      for (const auto& cv : cands) {
        int cnt = 0;
        double e = ebme(ctx, bi, bj, *refs[cv.ref].img, cv.v, &cnt);
        double score = e + score_extra(bi, bj, cv, cnt);
        if (first || score < best_score) {
          first = false;
          best_score = score;
          best_err = e;
          best = cv;
        }
      }
      int i = cand.wz_field.idx(bi, bj);
      cand.wz_field.vec[i] = best.v;
      cand.wz_field.ref[i] = int8_t(best.ref);
      cand.wz_field.err[i] = best_err;
      cand.wz_field.valid[i] = 1;

      std::vector<NeighbourComp> nbs;
      for_key_neighbours(pat, bi, bj, [&](int ni, int nj, int side) {
        int k = cand.key_field.idx(ni, nj);
        if (!cand.key_field.valid[k]) return;
        nbs.push_back({cand.key_field.vec[k], refs[cand.key_field.ref[k]].img, side});
      });
      obmc_blend(cand.prediction, bj * b, bi * b, b, *refs[best.ref].img, best.v, nbs);
    }
  return cand;
}

double zero_extra(int, int, const CandVec&, int) { return 0.0; }

}  // namespace

long block_sad(const Frame& cur, int x0, int y0, int b, const Frame& ref, int rx4, int ry4) {
  long acc = 0;
  if ((rx4 & 3) == 0 && (ry4 & 3) == 0) {
    int rx = rx4 >> 2, ry = ry4 >> 2;
    for (int y = 0; y < b; y++)
      for (int x = 0; x < b; x++)
        acc += std::labs(long(cur.at(x0 + x, y0 + y)) - long(ref.at_clamped(rx + x, ry + y)));
    return acc;
  }
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++)
      acc += std::labs(long(cur.at(x0 + x, y0 + y)) - long(sample_qpel(ref, rx4 + x * 4, ry4 + y * 4)));
  return acc;
}

double ebme(const ConcealContext& ctx, int bi, int bj, const Frame& ref, BlockVec v, int* count) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  const int m = ctx.cfg.boundary_width;
  const Frame& cur = *ctx.current;
  const int x0 = bj * b, y0 = bi * b;

  double acc = 0.0;
  int n = 0;
  auto strip = [&](int sx, int sy, int w, int h) {
    for (int y = sy; y < sy + h; y++)
      for (int x = sx; x < sx + w; x++) {
        acc += std::abs(double(cur.at(x, y)) - double(sample_qpel(ref, x * 4 + v.x, y * 4 + v.y)));
        n++;
      }
  };
  if (bi > 0) strip(x0, y0 - m, b, m);
  if (bi < pat.grid_h - 1) strip(x0, y0 + b, b, m);
  if (bj > 0) strip(x0 - m, y0, m, b);
  if (bj < pat.grid_w - 1) strip(x0 + b, y0, m, b);
  if (count) *count = n;
  return acc;
}

MotionField estimate_key_field(const ConcealContext& ctx, const std::vector<SiRef>& refs,
                               bool disparity_window) {
  if (refs.empty()) throw std::invalid_argument("estimate_key_field: no reference frames");
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  MotionField field;
  field.init(pat.grid_w, pat.grid_h);

  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (!pat.is_key(bi, bj)) continue;
      long best_sad = 0;
      BlockVec best_v{};
      int best_ref = 0;
      for (int r = 0; r < int(refs.size()); r++) {
        int rx = disparity_window ? ctx.cfg.disparity_range_x : ctx.cfg.search_range * refs[r].distance;
        int ry = disparity_window ? ctx.cfg.disparity_range_y : ctx.cfg.search_range * refs[r].distance;
        BlockVec v;
        long sad;
        search_block(*ctx.current, bj * b, bi * b, b, *refs[r].img, rx, ry, v, sad);
        if (r == 0 || sad < best_sad) {
          best_sad = sad;
          best_v = v;
          best_ref = r;
        }
      }
      int i = field.idx(bi, bj);
      field.vec[i] = best_v;
      field.ref[i] = int8_t(best_ref);
      field.err[i] = double(best_sad);
      field.valid[i] = 1;
    }
  return field;
}

CandidateSI conceal_temporal(const ConcealContext& ctx) {
  return conceal_generic(ctx, ctx.temporal_refs, false, SiMethod::tec, zero_extra);
}

CandidateSI conceal_view(const ConcealContext& ctx) {
  if (ctx.view_refs.empty()) throw std::invalid_argument("conceal_view: no adjacent view");
  return conceal_generic(ctx, ctx.view_refs, true, SiMethod::vec, zero_extra);
}

CandidateSI fuse_sad(const ConcealContext& ctx, const CandidateSI& tec, const CandidateSI& vec) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  CandidateSI out = tec;  // TEC wins all ties
  out.method = SiMethod::fused;
  // blocks taken from VEC keep motion data pointing at VEC's references, so
  // the fused candidate carries both lists and offsets the copied indices
  const int8_t roff = int8_t(out.refs.size());
  out.refs.insert(out.refs.end(), vec.refs.begin(), vec.refs.end());

  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      int i = out.wz_field.idx(bi, bj);
      bool key = pat.is_key(bi, bj);
      double et = key ? tec.key_field.err[i] : tec.wz_field.err[i];
      double ev = key ? vec.key_field.err[i] : vec.wz_field.err[i];
      if (!(ev < et)) continue;
      out.block_src[i] = 1;
      if (key) {
        out.key_field.vec[i] = vec.key_field.vec[i];
        out.key_field.ref[i] = int8_t(roff + vec.key_field.ref[i]);
        out.key_field.err[i] = vec.key_field.err[i];
        for (int y = bi * b; y < (bi + 1) * b; y++)
          for (int x = bj * b; x < (bj + 1) * b; x++)
            out.key_prediction.at(x, y) = vec.key_prediction.at(x, y);
      } else {
        out.wz_field.vec[i] = vec.wz_field.vec[i];
        out.wz_field.ref[i] = int8_t(roff + vec.wz_field.ref[i]);
        out.wz_field.err[i] = vec.wz_field.err[i];
        for (int y = bi * b; y < (bi + 1) * b; y++)
          for (int x = bj * b; x < (bj + 1) * b; x++)
            out.prediction.at(x, y) = vec.prediction.at(x, y);
      }
    }

  // refresh the ranking criterion for the mixed KEY prediction
  double acc = 0.0;
  long n = 0;
  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (!pat.is_key(bi, bj)) continue;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) {
          double d = double(out.key_prediction.at(x, y)) - double(ctx.current->at(x, y));
          acc += d * d;
          n++;
        }
    }
  out.key_mse = n ? acc / double(n) : 0.0;
  return out;
}

CandidateSI fuse_vector_median(const ConcealContext& ctx, const CandidateSI& tec,
                               const CandidateSI& vec) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  CandidateSI out = tec;
  out.method = SiMethod::fused;
  const int8_t roff = int8_t(out.refs.size());
  out.refs.insert(out.refs.end(), vec.refs.begin(), vec.refs.end());

  // Median over 4 KEY neighbours, the nearest left/top blocks of the same
  // (WZ) class, and the block itself; a vector far from its local median
  // suggests an occlusion handled better by the other prediction.
  auto median_dist = [&](const CandidateSI& c, int bi, int bj) {
    bool key = pat.is_key(bi, bj);
    auto cell_vec = [&](int i, bool cell_key) {
      return cell_key ? c.key_field.vec[i] : c.wz_field.vec[i];
    };
    std::vector<BlockVec> hood;
    for_key_neighbours(pat, bi, bj, [&](int ni, int nj, int) {
      hood.push_back(cell_vec(c.key_field.idx(ni, nj), true));
    });
    // nearest WZ blocks to the left and above: adjacent for a KEY block,
    // two cells away for a WZ block
    int step = key ? 1 : 2;
    if (bj - step >= 0) hood.push_back(cell_vec(c.key_field.idx(bi, bj - step), false));
    if (bi - step >= 0) hood.push_back(cell_vec(c.key_field.idx(bi - step, bj), false));
    int self = c.key_field.idx(bi, bj);
    BlockVec v = cell_vec(self, key);
    hood.push_back(v);
    BlockVec med = component_median(hood);
    return std::hypot(double(v.x - med.x), double(v.y - med.y));
  };

  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      double dt = median_dist(tec, bi, bj);
      if (dt <= ctx.cfg.median_threshold) continue;  // inlier: keep TEC
      double dv = median_dist(vec, bi, bj);
      if (!(dv < dt)) continue;  // ties keep TEC
      int i = out.wz_field.idx(bi, bj);
      out.block_src[i] = 1;
      bool key = pat.is_key(bi, bj);
      const MotionField& src = key ? vec.key_field : vec.wz_field;
      MotionField& dst = key ? out.key_field : out.wz_field;
      dst.vec[i] = src.vec[i];
      dst.ref[i] = int8_t(roff + src.ref[i]);
      dst.err[i] = src.err[i];
      const Frame& sf = key ? vec.key_prediction : vec.prediction;
      Frame& df = key ? out.key_prediction : out.prediction;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) df.at(x, y) = sf.at(x, y);
    }

  double acc = 0.0;
  long n = 0;
  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (!pat.is_key(bi, bj)) continue;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) {
          double d = double(out.key_prediction.at(x, y)) - double(ctx.current->at(x, y));
          acc += d * d;
          n++;
        }
    }
  out.key_mse = n ? acc / double(n) : 0.0;
  return out;
}

double ebmc_weight(double err, int boundary_count, double th) {
  double a = 1.0 / ((boundary_count * th) * (boundary_count * th));
  double ae2 = a * err * err;
  return 1.0 - ae2 / (1.0 + ae2);
}

CandidateSI refine_ebmc(const ConcealContext& ctx, const CandidateSI& initial) {
  const int b = ctx.pattern.block_size;
  auto extra = [&](int bi, int bj, const CandVec& cv, int boundary_count) {
    int i = initial.wz_field.idx(bi, bj);
    double w = ebmc_weight(initial.wz_field.err[i], std::max(boundary_count, 1), ctx.cfg.refine_th);
    const Frame& ref = *ctx.temporal_refs[cv.ref].img;
    double acc = 0.0;
    for (int y = bi * b; y < (bi + 1) * b; y++)
      for (int x = bj * b; x < (bj + 1) * b; x++)
        acc += std::abs(double(initial.prediction.at(x, y)) -
                        double(sample_qpel(ref, x * 4 + cv.v.x, y * 4 + cv.v.y)));
    return w * acc;
  };
  return conceal_generic(ctx, ctx.temporal_refs, false, SiMethod::tec, extra);
}

double directional_entropy(const ConcealContext& ctx, int bi, int bj, int* dominant_bin) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  const Frame& cur = *ctx.current;

  // gradients over the interiors of the neighbouring KEY blocks, which is
  // the only decoded data around this block
  double mag[8] = {0};
  double total = 0.0;
  for_key_neighbours(pat, bi, bj, [&](int ni, int nj, int) {
    for (int y = ni * b + 1; y < (ni + 1) * b - 1; y++)
      for (int x = nj * b + 1; x < (nj + 1) * b - 1; x++) {
        double gx = (cur.at(x + 1, y - 1) + 2 * cur.at(x + 1, y) + cur.at(x + 1, y + 1)) -
                    (cur.at(x - 1, y - 1) + 2 * cur.at(x - 1, y) + cur.at(x - 1, y + 1));
        double gy = (cur.at(x - 1, y + 1) + 2 * cur.at(x, y + 1) + cur.at(x + 1, y + 1)) -
                    (cur.at(x - 1, y - 1) + 2 * cur.at(x, y - 1) + cur.at(x + 1, y - 1));
        double m = std::hypot(gx, gy);
        if (m < 1e-9) continue;
        // edge direction is perpendicular to the gradient, folded to [0, pi)
        double theta = std::atan2(gy, gx) + M_PI / 2.0;
        while (theta < 0) theta += M_PI;
        while (theta >= M_PI) theta -= M_PI;
        int bin = int(std::lround(theta / (M_PI / 8.0))) & 7;
        mag[bin] += m;
        total += m;
      }
  });

  if (dominant_bin) {
    int best = 0;
    for (int k = 1; k < 8; k++)
      if (mag[k] > mag[best]) best = k;
    *dominant_bin = best;
  }
  if (total < 1e-9) return std::log(8.0);  // featureless: maximal uncertainty
  double h = 0.0;
  for (double m : mag)
    if (m > 0) {
      double p = m / total;
      h -= p * std::log(p);
    }
  return h;
}

namespace {

// distance-weighted average of the four facing boundary pixels
void sec_bilinear(const ConcealContext& ctx, int bi, int bj, Frame& out) {
  const int b = ctx.pattern.block_size;
  const Frame& cur = *ctx.current;
  const int x0 = bj * b, y0 = bi * b;
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++) {
      double acc = 0.0, wsum = 0.0;
      auto add = [&](bool ok, int px, int py, double dist) {
        if (!ok) return;
        acc += cur.at(px, py) / dist;
        wsum += 1.0 / dist;
      };
      add(x0 > 0, x0 - 1, y0 + y, x + 1.0);
      add(x0 + b < cur.width, x0 + b, y0 + y, double(b - x));
      add(y0 > 0, x0 + x, y0 - 1, y + 1.0);
      add(y0 + b < cur.height, x0 + x, y0 + b, double(b - y));
      out.at(x0 + x, y0 + y) =
          wsum > 0 ? uint8_t(std::clamp(int(std::lround(acc / wsum)), 0, 255)) : 128;
    }
}

// walk from (x,y) along dir until a decoded pixel is hit; returns distance
// travelled or a negative value when the frame edge cuts the ray off
double march_ray(const ConcealContext& ctx, double x, double y, double dx, double dy,
                 int* px, int* py) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  for (double t = 0.5; t < 4.0 * b; t += 0.5) {
    int cx = int(std::lround(x + dx * t));
    int cy = int(std::lround(y + dy * t));
    if (cx < 0 || cy < 0 || cx >= ctx.current->width || cy >= ctx.current->height) return -1.0;
    if (pat.is_key(cy / b, cx / b)) {
      *px = cx;
      *py = cy;
      return t;
    }
  }
  return -1.0;
}

void sec_directional(const ConcealContext& ctx, int bi, int bj, int bin, Frame& out) {
  const int b = ctx.pattern.block_size;
  const Frame& cur = *ctx.current;
  const double theta = bin * (M_PI / 8.0);
  const double dx = std::cos(theta), dy = std::sin(theta);
  const int x0 = bj * b, y0 = bi * b;
  for (int y = 0; y < b; y++)
    for (int x = 0; x < b; x++) {
      int ax = 0, ay = 0, bx = 0, by = 0;
      double ta = march_ray(ctx, x0 + x, y0 + y, dx, dy, &ax, &ay);
      double tb = march_ray(ctx, x0 + x, y0 + y, -dx, -dy, &bx, &by);
      double v;
      if (ta > 0 && tb > 0)
        v = (cur.at(ax, ay) * tb + cur.at(bx, by) * ta) / (ta + tb);
      else if (ta > 0)
        v = cur.at(ax, ay);
      else if (tb > 0)
        v = cur.at(bx, by);
      else {
        sec_bilinear(ctx, bi, bj, out);  // ray never left the block: fall back
        return;
      }
      out.at(x0 + x, y0 + y) = uint8_t(std::clamp(int(std::lround(v)), 0, 255));
    }
}

}  // namespace

void sec_conceal_block(const ConcealContext& ctx, int bi, int bj, Frame& out) {
  int bin = 0;
  double h = directional_entropy(ctx, bi, bj, &bin);
  if (h < ctx.cfg.sec_entropy_threshold)
    sec_directional(ctx, bi, bj, bin, out);
  else
    sec_bilinear(ctx, bi, bj, out);
}

ModeStats mode_stats(const ConcealContext& ctx, const CandidateSI& cand, int bi, int bj) {
  const auto& pat = ctx.pattern;
  const int b = pat.block_size;
  const Frame& cur = *ctx.current;
  int i = cand.wz_field.idx(bi, bj);
  const Frame& ref = *cand.refs[cand.wz_field.ref[i]].img;
  BlockVec v = cand.wz_field.vec[i];

  double sum = 0.0, sum2 = 0.0, diff2 = 0.0;
  long n = 0;
  for_key_neighbours(pat, bi, bj, [&](int ni, int nj, int) {
    for (int y = ni * b; y < (ni + 1) * b; y++)
      for (int x = nj * b; x < (nj + 1) * b; x++) {
        double p = cur.at(x, y);
        double q = sample_qpel(ref, x * 4 + v.x, y * 4 + v.y);
        sum += p;
        sum2 += p * p;
        diff2 += (p - q) * (p - q);
        n++;
      }
  });
  ModeStats st;
  if (n) {
    double mean = sum / double(n);
    st.sa = sum2 / double(n) - mean * mean;
    st.mda = diff2 / double(n);
  }
  return st;
}

CandidateSI apply_mode_selection(const ConcealContext& ctx, CandidateSI fused) {
  const auto& pat = ctx.pattern;
  for (int bi = 0; bi < pat.grid_h; bi++)
    for (int bj = 0; bj < pat.grid_w; bj++) {
      if (pat.is_key(bi, bj)) continue;
      ModeStats st = mode_stats(ctx, fused, bi, bj);
      if (!select_sec(st.sa, st.mda, ctx.cfg.mda_threshold)) continue;
      sec_conceal_block(ctx, bi, bj, fused.prediction);
      fused.block_src[fused.wz_field.idx(bi, bj)] = 2;
    }
  return fused;
}

std::vector<const CandidateSI*> rank_si(const CandidateSI& fused, const CandidateSI& tec,
                                        const CandidateSI* vec) {
  std::vector<const CandidateSI*> order{&fused, &tec};
  if (vec) {
    if (vec->key_mse < tec.key_mse) order = {&fused, vec, &tec};
    else order.push_back(vec);
  }
  return order;
}

SiBundle generate_si(const ConcealContext& ctx) {
  SiBundle bundle;
  bundle.tec = conceal_temporal(ctx);
  if (!ctx.view_refs.empty()) bundle.vec = conceal_view(ctx);

  if (!bundle.vec) {
    bundle.fused = bundle.tec;
    bundle.fused.method = SiMethod::fused;
  } else {
    switch (ctx.cfg.fusion) {
      case FusionMethod::sad:
        bundle.fused = fuse_sad(ctx, bundle.tec, *bundle.vec);
        break;
      case FusionMethod::vector_median:
        bundle.fused = fuse_vector_median(ctx, bundle.tec, *bundle.vec);
        break;
      case FusionMethod::refine_si:
        bundle.fused = refine_ebmc(ctx, *bundle.vec);
        bundle.fused.method = SiMethod::fused;
        break;
      case FusionMethod::fusion_refine_si: {
        CandidateSI refined = refine_ebmc(ctx, *bundle.vec);
        bundle.fused = fuse_sad(ctx, refined, *bundle.vec);
        break;
      }
    }
  }
  bundle.fused = apply_mode_selection(ctx, std::move(bundle.fused));
  bundle.ranked = rank_si(bundle.fused, bundle.tec, bundle.vec ? &*bundle.vec : nullptr);
  return bundle;
}

}  // namespace mvdvc
