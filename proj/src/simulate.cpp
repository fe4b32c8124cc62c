#include "mvdvc/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

#include "mvdvc/feedback.hpp"
#include "mvdvc/gop.hpp"
#include "mvdvc/interleave.hpp"
#include "mvdvc/intra.hpp"
#include "mvdvc/noise_model.hpp"
#include "mvdvc/si_engine.hpp"
#include "mvdvc/subtraction.hpp"
#include "mvdvc/turbo.hpp"
#include "mvdvc/wz_decoder.hpp"
#include "mvdvc/wz_pipeline.hpp"

namespace mvdvc {

namespace {

uint8_t clamp_px(double v) {
  return uint8_t(std::clamp(std::lround(v), 0l, 255l));
}

// One entry of the global coding schedule: an intra frame, or one or two
// B frames whose KEY and WZ data are coded together.
struct ScheduleEntry {
  bool intra = false;
  int view = 1;
  int f1 = 0;
  int f2 = 0;  // 0 when the B frame is coded alone
  int rank = 0;
};

// B frames pair up greedily in temporal order. Two consecutive B frames
// join when nothing intra sits between them; at GOP length 2 the pairing
// crosses the single intervening intra frame instead (every B frame would
// stay alone otherwise).
std::vector<ScheduleEntry> build_schedule(const GopLayout& g) {
  std::vector<ScheduleEntry> out;
  for (int v = 1; v <= g.num_views; v++) {
    std::vector<int> bs;
    for (int f = 1; f <= g.num_frames; f++) {
      if (g.is_intra(v, f)) {
        out.push_back({true, v, f, 0, -1});
      } else {
        bs.push_back(f);
      }
    }
    for (size_t i = 0; i < bs.size();) {
      bool pair = false;
      if (i + 1 < bs.size()) {
        pair = bs[i + 1] == bs[i] + 1 || g.gop_length == 2;
      }
      ScheduleEntry e;
      e.view = v;
      e.f1 = bs[i];
      e.rank = g.decode_rank(v, e.f1);
      if (pair) {
        e.f2 = bs[i + 1];
        e.rank = std::min(e.rank, g.decode_rank(v, e.f2));
      }
      out.push_back(e);
      i += pair ? 2 : 1;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ScheduleEntry& a, const ScheduleEntry& b) {
    if (a.intra != b.intra) return a.intra;
    if (a.intra) return std::tie(a.f1, a.view) < std::tie(b.f1, b.view);
    return std::tie(a.rank, a.view, a.f1) < std::tie(b.rank, b.view, b.f1);
  });
  return out;
}

// one turbo-coded slice of a pair's WZ samples
struct UnitSpec {
  BinModel bins;
  std::vector<uint32_t> idx;  // pool sample indices, coded order
};

int group_id_bits(int bp_max) { return std::max(1, int(std::bit_width(unsigned(bp_max)))); }

double wz_mse(const Frame& pred, const Frame& ref, const InterleavePattern& p) {
  const int b = p.block_size;
  double acc = 0.0;
  long n = 0;
  for (int bi = 0; bi < p.grid_h; bi++)
    for (int bj = 0; bj < p.grid_w; bj++) {
      if (p.is_key(bi, bj)) continue;
      for (int y = bi * b; y < (bi + 1) * b; y++)
        for (int x = bj * b; x < (bj + 1) * b; x++) {
          double d = double(pred.at(x, y)) - double(ref.at(x, y));
          acc += d * d;
          n++;
        }
    }
  return n ? acc / double(n) : 0.0;
}

void overlay_dynamic_key(Frame& dst, const BlockGroup& key, const ActivityMap& map, int mb) {
  const auto& p = key.pattern;
  const int b = p.block_size;
  for (int k = 0; k < key.block_count(); k++) {
    auto [bi, bj] = key.block_pos(k);
    if (!map.at(bj * b / mb, bi * b / mb)) continue;
    const uint8_t* px = key.block(k);
    for (int y = 0; y < b; y++)
      for (int x = 0; x < b; x++) dst.at(bj * b + x, bi * b + y) = px[y * b + x];
  }
}

struct Driver {
  CodecConfig cfg;
  GopLayout layout;
  const MultiViewSequence* input = nullptr;  // encode mode
  BitstreamContainer* out = nullptr;
  const BitstreamContainer* in = nullptr;  // replay mode
  size_t cursor = 0;
  MultiViewSequence decoded;
  std::vector<FeedbackState> fb;
  std::map<size_t, TurboCodec> codecs;
  std::vector<std::vector<StatsRow>> rows;  // [view-1][frame-1]

  bool encode() const { return input != nullptr; }
  const Frame& orig(int v, int f) const { return input->views[size_t(v) - 1].frames[size_t(f) - 1]; }
  Frame& dec(int v, int f) { return decoded.views[size_t(v) - 1].frames[size_t(f) - 1]; }

  const TurboCodec& codec_for(size_t n) {
    auto it = codecs.find(n);
    if (it == codecs.end())
      it = codecs
               .try_emplace(n, n, cfg.interleaver_seed, cfg.puncture_seed, cfg.puncture_period)
               .first;
    return it->second;
  }

  void put_record(RecordType t, PayloadWriter& w) {
    out->records.push_back({uint8_t(t), w.take()});
  }

  PayloadReader next_record(RecordType want) {
    while (cursor < in->records.size()) {
      const Record& r = in->records[cursor];
      if (r.type < uint8_t(RecordType::intra_payload) || r.type > uint8_t(RecordType::feedback_map)) {
        cursor++;  // unknown type, skip by length
        continue;
      }
      if (r.type != uint8_t(want)) throw std::runtime_error("unexpected record order in container");
      cursor++;
      return PayloadReader(r.payload);
    }
    throw std::runtime_error("container ends before expected record");
  }

  void run() {
    layout = build_gop_layout(cfg.num_views, cfg.num_frames, cfg.gop_length, cfg.order_mode);
    decoded.fps = cfg.fps;
    decoded.views.assign(size_t(cfg.num_views), {});
    for (auto& vs : decoded.views)
      vs.frames.assign(size_t(cfg.num_frames), Frame(cfg.width, cfg.height));
    fb.clear();
    for (int v = 0; v < cfg.num_views; v++) {
      FeedbackState st;
      st.mode = cfg.feedback;
      st.window = cfg.feedback_window;
      fb.push_back(std::move(st));
    }
    rows.assign(size_t(cfg.num_views), std::vector<StatsRow>(size_t(cfg.num_frames)));
    for (int v = 1; v <= cfg.num_views; v++)
      for (int f = 1; f <= cfg.num_frames; f++) {
        rows[v - 1][f - 1].view = v;
        rows[v - 1][f - 1].frame = f;
      }
    for (const auto& e : build_schedule(layout)) {
      if (e.intra)
        code_intra(e);
      else
        code_pair(e);
    }
  }

  IntraBitstream read_intra(int view, int f1, int f2, int kind) {
    PayloadReader r = next_record(RecordType::intra_payload);
    if (r.u8() != view || r.u16() != f1 || r.u16() != f2 || r.u8() != kind)
      throw std::runtime_error("intra record does not match the coding schedule");
    IntraBitstream bs;
    bs.qp = r.u8();
    bs.width = r.u16();
    bs.height = r.u16();
    bs.payload = r.bytes(r.u32());
    return bs;
  }

  void put_intra(int view, int f1, int f2, int kind, const IntraBitstream& bs) {
    PayloadWriter w;
    w.u8(uint8_t(view));
    w.u16(uint16_t(f1));
    w.u16(uint16_t(f2));
    w.u8(uint8_t(kind));
    w.u8(bs.qp);
    w.u16(bs.width);
    w.u16(bs.height);
    w.u32(uint32_t(bs.payload.size()));
    w.bytes(bs.payload);
    put_record(RecordType::intra_payload, w);
  }

  void code_intra(const ScheduleEntry& e) {
    Frame recon;
    if (encode()) {
      IntraBitstream bs = intra_encode(orig(e.view, e.f1), cfg.qp, &recon);
      put_intra(e.view, e.f1, 0, 0, bs);
      auto& row = rows[e.view - 1][e.f1 - 1];
      row.bits_key = long(bs.payload.size()) * 8;
      row.psnr_db = psnr(orig(e.view, e.f1), recon);
    } else {
      recon = intra_decode(read_intra(e.view, e.f1, 0, 0));
    }
    dec(e.view, e.f1) = std::move(recon);
  }

  void code_pair(const ScheduleEntry& e) {
    const int v = e.view, w = cfg.width, h = cfg.height, mb = cfg.macroblock_size;
    const bool paired = e.f2 != 0;
    const int nf = paired ? 2 : 1;
    const int fr[2] = {e.f1, e.f2};
    InterleavePattern pat[2];
    for (int k = 0; k < nf; k++)
      pat[k] = InterleavePattern::for_frame(w, h, cfg.block_size, parity_for_frame(fr[k]));
    const bool td = cfg.quant.domain == QuantDomain::transform;
    const bool subtract = cfg.frame_subtraction && paired;

    // activity maps; statics later copy from the nearest past intra frame
    ActivityMap maps[2];
    const Frame* ref_i = nullptr;
    if (subtract) {
      for (int f = e.f1 - 1; f >= 1; f--)
        if (layout.is_intra(v, f)) {
          ref_i = &dec(v, f);
          break;
        }
      if (!ref_i) throw std::logic_error("frame subtraction without a past intra frame");
      for (int k = 0; k < nf; k++) {
        if (encode()) {
          maps[k] = mark_dynamic(orig(v, fr[k]), orig(v, fr[k] - 1), cfg.subtraction_threshold, mb);
          PayloadWriter pw;
          pw.u8(uint8_t(v));
          pw.u16(uint16_t(fr[k]));
          pw.u16(uint16_t(maps[k].grid_w));
          pw.u16(uint16_t(maps[k].grid_h));
          pw.packed(maps[k].dynamic, 1);
          put_record(RecordType::activity_map, pw);
          rows[v - 1][fr[k] - 1].bits_maps = long(maps[k].grid_w) * maps[k].grid_h;
        } else {
          PayloadReader r = next_record(RecordType::activity_map);
          if (r.u8() != v || r.u16() != fr[k])
            throw std::runtime_error("activity map does not match the coding schedule");
          maps[k].grid_w = r.u16();
          maps[k].grid_h = r.u16();
          maps[k].dynamic = r.packed(size_t(maps[k].grid_w) * maps[k].grid_h, 1);
        }
      }
    }

    // KEY cells, jointly intra coded
    Frame key_recon;
    if (encode()) {
      Frame combined;
      if (subtract) {
        combined = pack_dynamic(orig(v, fr[0]), orig(v, fr[1]), pat[0], pat[1], maps[0], maps[1],
                                mb)
                       .combined_key;
      } else {
        auto g1 = split_checkerboard(orig(v, fr[0]), pat[0]).first;
        combined = paired
                       ? temporal_interleave(g1, split_checkerboard(orig(v, fr[1]), pat[1]).first)
                       : pack_key_group(g1);
      }
      IntraBitstream bs = intra_encode(combined, cfg.qp, &key_recon);
      put_intra(v, fr[0], paired ? fr[1] : 0, paired ? 1 : 2, bs);
      long bits = long(bs.payload.size()) * 8;
      rows[v - 1][fr[0] - 1].bits_key = paired ? bits - bits / 2 : bits;
      if (paired) rows[v - 1][fr[1] - 1].bits_key = bits / 2;
    } else {
      key_recon = intra_decode(read_intra(v, fr[0], paired ? fr[1] : 0, paired ? 1 : 2));
    }

    BlockGroup key_dec[2];
    if (paired) {
      auto [a, b] = temporal_deinterleave(key_recon, pat[0], pat[1]);
      key_dec[0] = std::move(a);
      key_dec[1] = std::move(b);
    } else {
      key_dec[0] = unpack_key_group(key_recon, pat[0]);
    }

    // current frames with KEY cells in place; WZ cells are filled by the
    // decode below (baseline) or already hold reference content (statics)
    Frame cur[2];
    for (int k = 0; k < nf; k++) {
      if (!subtract) {
        BlockGroup wz_zero{pat[k], false, w, h, {}};
        wz_zero.pixels.assign(size_t(wz_zero.block_count()) * cfg.block_size * cfg.block_size, 0);
        cur[k] = merge_groups(key_dec[k], wz_zero);
      } else {
        cur[k] = k == 0 ? *ref_i : build_updated_reference(*ref_i, cur[0], pat[0], maps[0], mb);
        overlay_dynamic_key(cur[k], key_dec[k], maps[k], mb);
      }
    }

    // side information and noise statistics per frame and hypothesis
    SiBundle si[2];
    ConcealContext ctx[2];
    for (int k = 0; k < nf; k++) {
      ctx[k].current = &cur[k];
      ctx[k].pattern = pat[k];
      ctx[k].cfg = cfg.si;
      ReferenceSet rs = reference_frames(v, fr[k], layout, e.rank);
      if (rs.past)
        ctx[k].temporal_refs.push_back({&dec(rs.past->view, rs.past->frame), fr[k] - rs.past->frame});
      if (rs.future)
        ctx[k].temporal_refs.push_back(
            {&dec(rs.future->view, rs.future->frame), rs.future->frame - fr[k]});
      for (const FrameId& r : rs.view_refs) ctx[k].view_refs.push_back({&dec(r.view, r.frame), 1});
      si[k] = generate_si(ctx[k]);
    }
    int hyps = cfg.si_hypotheses;
    for (int k = 0; k < nf; k++) hyps = std::min(hyps, int(si[k].ranked.size()));
    std::vector<NoiseField> noise[2];
    for (int k = 0; k < nf; k++)
      for (int hh = 0; hh < hyps; hh++)
        noise[k].push_back(estimate_noise_field(ctx[k], *si[k].ranked[hh]));

    // WZ sample pool: frame 1's samples then frame 2's (pixel domain), or
    // band-major coefficients (transform domain)
    struct Pos {
      int k, x, y;
    };
    struct Coef {
      int k, band;
      uint32_t i;
    };
    std::vector<Pos> pos;
    std::vector<Coef> coef;
    std::vector<std::vector<double>> si_pool(static_cast<size_t>(hyps));
    std::vector<std::vector<double>> al_pool(static_cast<size_t>(hyps));
    std::vector<int> enc_sym;

    std::vector<std::pair<int, int>> wz_cells[2];
    for (int k = 0; k < nf; k++)
      for (int bi = 0; bi < pat[k].grid_h; bi++)
        for (int bj = 0; bj < pat[k].grid_w; bj++)
          if (!pat[k].is_key(bi, bj)) wz_cells[k].emplace_back(bi, bj);

    std::vector<BandView> si_bands[2];
    const std::array<int, 16>* band_levels = td ? &cfg.quant.band_levels() : nullptr;
    if (!td) {
      const int b = cfg.block_size;
      std::vector<uint8_t> enc_px;
      for (int k = 0; k < nf; k++) {
        std::vector<std::pair<int, int>> pts;
        if (subtract) {
          pts = dynamic_wz_positions(pat[k], maps[k], mb);
        } else {
          for (auto [bi, bj] : wz_cells[k])
            for (int y = bi * b; y < (bi + 1) * b; y++)
              for (int x = bj * b; x < (bj + 1) * b; x++) pts.emplace_back(x, y);
        }
        for (auto [x, y] : pts) {
          pos.push_back({k, x, y});
          for (int hh = 0; hh < hyps; hh++) {
            si_pool[hh].push_back(double(si[k].ranked[hh]->prediction.at(x, y)));
            al_pool[hh].push_back(noise[k][hh].alpha[noise[k][hh].idx(y / b, x / b)]);
          }
          if (encode()) enc_px.push_back(orig(v, fr[k]).at(x, y));
        }
      }
      if (encode()) enc_sym = pd_quantize_samples(enc_px, cfg.quant.levels);
    } else {
      BandView enc_bands[2];
      for (int k = 0; k < nf; k++) {
        for (int hh = 0; hh < hyps; hh++)
          si_bands[k].push_back(
              td_forward(split_checkerboard(si[k].ranked[hh]->prediction, pat[k]).second));
        if (encode()) enc_bands[k] = td_forward(split_checkerboard(orig(v, fr[k]), pat[k]).second);
      }
      for (int band = 0; band < 16; band++) {
        if ((*band_levels)[size_t(band)] <= 0) continue;
        BinModel bins = QuantSpec::band_bins(band, (*band_levels)[size_t(band)]);
        for (int k = 0; k < nf; k++) {
          const BandView& bv = si_bands[k][0];
          for (uint32_t i = 0; i < bv.band_length(); i++) {
            coef.push_back({k, band, i});
            auto [bi, bj] = wz_cells[k][i / uint32_t(bv.sub_per_block)];
            for (int hh = 0; hh < hyps; hh++) {
              si_pool[hh].push_back(si_bands[k][size_t(hh)].bands[size_t(band)][i]);
              al_pool[hh].push_back(noise[k][size_t(hh)].alpha[noise[k][size_t(hh)].idx(bi, bj)]);
            }
            if (encode()) enc_sym.push_back(bins.quantize(enc_bands[k].bands[size_t(band)][i]));
          }
        }
      }
    }
    const size_t pool_n = td ? coef.size() : pos.size();

    // partition the pool into turbo units
    std::vector<UnitSpec> units;
    std::vector<std::vector<int>> unit_regions;  // smart mode, per unit
    if (pool_n) {
      if (td) {
        size_t start = 0;
        for (int band = 0; band < 16; band++) {
          if ((*band_levels)[size_t(band)] <= 0) continue;
          size_t len = 0;
          for (int k = 0; k < nf; k++) len += si_bands[k][0].band_length();
          UnitSpec u{QuantSpec::band_bins(band, (*band_levels)[size_t(band)]), {}};
          u.idx.resize(len);
          std::iota(u.idx.begin(), u.idx.end(), uint32_t(start));
          start += len;
          units.push_back(std::move(u));
        }
      } else if (cfg.feedback == FeedbackMode::simple && !fb[v - 1].groups.empty()) {
        const auto& st = fb[v - 1];
        const int gw = (w + cfg.simple_block - 1) / cfg.simple_block;
        std::vector<int> sample_group(pool_n);
        std::vector<long> bits(size_t(st.group_count) + 1, 0);
        for (size_t i = 0; i < pool_n; i++) {
          int g = st.groups[size_t(pos[i].y / cfg.simple_block) * gw + pos[i].x / cfg.simple_block];
          sample_group[i] = g;
          bits[size_t(g)]++;
        }
        auto merged = merge_small_groups(std::span<const long>(bits.data() + 1, size_t(st.group_count)),
                                         cfg.min_turbo_block);
        std::map<int, UnitSpec> by_id;
        for (size_t i = 0; i < pool_n; i++) {
          UnitSpec& u = by_id[merged[size_t(sample_group[i])]];
          u.bins = cfg.quant.pixel_bins();
          u.idx.push_back(uint32_t(i));
        }
        for (auto& [id, u] : by_id) units.push_back(std::move(u));
      } else if (cfg.feedback == FeedbackMode::smart) {
        auto& st = fb[v - 1];
        const int gw = (w + cfg.smart_block - 1) / cfg.smart_block;
        const int gh = (h + cfg.smart_block - 1) / cfg.smart_block;
        st.ensure_counters(size_t(gw) * gh);
        std::vector<int> order = smart_order(st.counters);
        std::vector<std::vector<uint32_t>> region_samples(order.size());
        for (size_t i = 0; i < pool_n; i++) {
          int rg = (pos[i].y / cfg.smart_block) * gw + pos[i].x / cfg.smart_block;
          region_samples[size_t(rg)].push_back(uint32_t(i));
        }
        std::vector<long> bits(order.size());
        for (size_t oi = 0; oi < order.size(); oi++)
          bits[oi] = long(region_samples[size_t(order[oi])].size());
        auto merged = merge_small_groups(bits, cfg.min_turbo_block);
        for (size_t oi = 0; oi < order.size();) {
          size_t end = size_t(merged[oi + 1]);
          UnitSpec u{cfg.quant.pixel_bins(), {}};
          std::vector<int> regions;
          for (size_t j = oi; j < end; j++) {
            regions.push_back(order[j]);
            for (uint32_t s : region_samples[size_t(order[j])]) u.idx.push_back(s);
          }
          if (!u.idx.empty()) {
            units.push_back(std::move(u));
            unit_regions.push_back(std::move(regions));
          }
          oi = end;
        }
      } else {
        UnitSpec u{cfg.quant.pixel_bins(), {}};
        u.idx.resize(pool_n);
        std::iota(u.idx.begin(), u.idx.end(), 0u);
        units.push_back(std::move(u));
      }
    }

    if (encode()) {
      PayloadWriter pw;
      pw.u8(uint8_t(v));
      pw.u16(uint16_t(fr[0]));
      pw.u16(uint16_t(paired ? fr[1] : 0));
      pw.u8(td ? 1 : 0);
      pw.u8(uint8_t(td ? cfg.quant.table : cfg.quant.levels));
      pw.u32(uint32_t(pool_n));
      pw.u16(uint16_t(units.size()));
      put_record(RecordType::wz_header, pw);
    } else {
      PayloadReader r = next_record(RecordType::wz_header);
      bool ok = r.u8() == v && r.u16() == fr[0] && r.u16() == (paired ? fr[1] : 0);
      ok = ok && r.u8() == (td ? 1 : 0);
      ok = ok && r.u8() == (td ? cfg.quant.table : cfg.quant.levels);
      ok = ok && r.u32() == pool_n && r.u16() == units.size();
      if (!ok) throw std::runtime_error("wz header does not match the coding schedule");
    }

    // Units are serviced with parity in order while the running whole-frame
    // BER estimate stays above target; once it drops below, the remaining
    // units settle for hard side-information decisions at zero parity cost.
    struct Prior {
      UnitSideInfo usi;
      std::vector<double> plane_ber;
      std::vector<int> symbols;
    };
    std::vector<Prior> prior(units.size());
    double frame_err = 0.0;
    long frame_bits = 0;
    for (size_t ui = 0; ui < units.size(); ui++) {
      Prior& p = prior[ui];
      const UnitSpec& u = units[ui];
      const size_t n = u.idx.size();
      p.usi.bins = u.bins;
      p.usi.si.assign(size_t(hyps), {});
      p.usi.alpha.assign(size_t(hyps), {});
      for (int hh = 0; hh < hyps; hh++) {
        p.usi.si[size_t(hh)].reserve(n);
        p.usi.alpha[size_t(hh)].reserve(n);
        for (uint32_t s : u.idx) {
          p.usi.si[size_t(hh)].push_back(si_pool[size_t(hh)][s]);
          p.usi.alpha[size_t(hh)].push_back(al_pool[size_t(hh)][s]);
        }
      }
      const int bp = u.bins.bitplanes();
      std::vector<uint32_t> prefix(n, 0);
      for (int plane = 1; plane <= bp; plane++) {
        auto llr = plane_llrs(p.usi, prefix, plane);
        for (size_t i = 0; i < n; i++) prefix[i] = (prefix[i] << 1) | uint32_t(llr[i] < 0);
        p.plane_ber.push_back(estimate_ber(llr));
        frame_err += p.plane_ber.back() * double(n);
      }
      frame_bits += long(n) * bp;
      p.symbols.resize(n);
      for (size_t i = 0; i < n; i++) p.symbols[i] = int(gray_decode(prefix[i]));
    }

    std::vector<int> dsym(pool_n, 0);
    std::vector<std::vector<std::vector<uint8_t>>> unit_clip(units.size());
    std::vector<long> unit_batches(units.size(), 0);
    long pair_parity = 0, pair_batches = 0;
    for (size_t ui = 0; ui < units.size(); ui++) {
      const UnitSpec& u = units[ui];
      Prior& p = prior[ui];
      const size_t n = u.idx.size();
      const int bp = u.bins.bitplanes();

      bool service = false;
      std::vector<ReplayParity> rp;
      if (encode()) {
        service = frame_err > cfg.ber_threshold * double(frame_bits);
      } else {
        rp.resize(size_t(bp));
        long total = 0;
        for (int plane = 1; plane <= bp; plane++) {
          PayloadReader r = next_record(RecordType::parity_batch);
          bool ok = r.u8() == v && r.u16() == fr[0] && r.u16() == (paired ? fr[1] : 0);
          ok = ok && r.u16() == ui && r.u8() == plane;
          if (!ok) throw std::runtime_error("parity record does not match the coding schedule");
          uint8_t tails = r.u8();
          auto& pl = rp[size_t(plane) - 1];
          for (int i = 0; i < 4; i++) {
            pl.tail_sys[size_t(i)] = (tails >> i) & 1;
            pl.tail_par[size_t(i)] = (tails >> (4 + i)) & 1;
          }
          int bc = r.u16();
          for (int bk = 0; bk < bc; bk++) pl.batch_bits.push_back(r.packed(r.u32(), 1));
          total += bc;
        }
        service = total > 0;
      }

      std::vector<int> out_sym;
      if (service) {
        const TurboCodec& tc = codec_for(n);
        UnitDecode ud;
        if (encode()) {
          std::vector<int> usym(n);
          for (size_t i = 0; i < n; i++) usym[i] = enc_sym[u.idx[i]];
          auto planes = extract_bitplanes(usym, bp);
          std::vector<TurboCode> codes;
          codes.reserve(planes.size());
          for (auto& pb : planes) codes.push_back(tc.encode(pb));
          ud = decode_wz_unit(tc, codes, p.usi, cfg, [&](int plane, const PlaneDecode& pd) {
            const TurboCode& code = codes[size_t(plane) - 1];
            PayloadWriter pw;
            pw.u8(uint8_t(v));
            pw.u16(uint16_t(fr[0]));
            pw.u16(uint16_t(paired ? fr[1] : 0));
            pw.u16(uint16_t(ui));
            pw.u8(uint8_t(plane));
            uint8_t tails = 0;
            for (int i = 0; i < 4; i++)
              tails |= uint8_t((code.tail_sys[size_t(i)] & 1) << i) |
                       uint8_t((code.tail_par[size_t(i)] & 1) << (4 + i));
            pw.u8(tails);
            pw.u16(uint16_t(pd.batches));
            for (int bk = 0; bk < pd.batches; bk++) {
              ParityBatch pb = tc.batch(bk);
              const auto& par = pb.stream == 0 ? code.parity1 : code.parity2;
              std::vector<uint8_t> bits;
              bits.reserve(pb.positions.size());
              for (int q : pb.positions) bits.push_back(par[size_t(q)]);
              pw.u32(uint32_t(bits.size()));
              pw.packed(bits, 1);
            }
            put_record(RecordType::parity_batch, pw);
          });
        } else {
          ud = decode_wz_unit_replay(tc, rp, p.usi, cfg);
        }
        for (int plane = 1; plane <= bp; plane++)
          frame_err += (ud.planes[size_t(plane) - 1].est_ber - p.plane_ber[size_t(plane) - 1]) *
                       double(n);
        out_sym = std::move(ud.symbols);
        pair_parity += ud.parity_bits;
        pair_batches += ud.batches;
        unit_batches[ui] = ud.batches;
      } else {
        if (encode()) {
          for (int plane = 1; plane <= bp; plane++) {
            PayloadWriter pw;
            pw.u8(uint8_t(v));
            pw.u16(uint16_t(fr[0]));
            pw.u16(uint16_t(paired ? fr[1] : 0));
            pw.u16(uint16_t(ui));
            pw.u8(uint8_t(plane));
            pw.u8(0);
            pw.u16(0);
            put_record(RecordType::parity_batch, pw);
          }
        }
        out_sym = p.symbols;
      }
      for (size_t i = 0; i < n; i++) dsym[u.idx[i]] = out_sym[i];
      if (cfg.feedback == FeedbackMode::simple)
        unit_clip[ui] = build_clipping_maps(out_sym, p.usi.si[0], u.bins);
    }

    // reconstruction and pixel writes
    if (!td) {
      std::vector<double> si_row(static_cast<size_t>(hyps));
      for (const UnitSpec& u : units)
        for (uint32_t s : u.idx) {
          for (int hh = 0; hh < hyps; hh++) si_row[size_t(hh)] = si_pool[size_t(hh)][s];
          double val = reconstruct_sample(dsym[s], si_row, u.bins, cfg.reconstruction);
          cur[pos[s].k].at(pos[s].x, pos[s].y) = clamp_px(val);
        }
    } else if (pool_n) {
      std::vector<BandView> dec_bv;
      for (int k = 0; k < nf; k++) dec_bv.push_back(si_bands[k][0]);  // uncoded bands keep SI
      std::vector<double> si_row(static_cast<size_t>(hyps));
      for (const UnitSpec& u : units)
        for (uint32_t s : u.idx) {
          for (int hh = 0; hh < hyps; hh++) si_row[size_t(hh)] = si_pool[size_t(hh)][s];
          dec_bv[size_t(coef[s].k)].bands[size_t(coef[s].band)][coef[s].i] =
              reconstruct_sample(dsym[s], si_row, u.bins, cfg.reconstruction);
        }
      for (int k = 0; k < nf; k++) {
        auto [kg, wg] = split_checkerboard(cur[k], pat[k]);
        td_inverse(dec_bv[size_t(k)], wg);
        cur[k] = merge_groups(kg, wg);
      }
    }

    for (int k = 0; k < nf; k++) dec(v, fr[k]) = std::move(cur[k]);

    // feedback bookkeeping, mirrored on both sides
    if (cfg.feedback == FeedbackMode::simple && !td) {
      const int bp = cfg.quant.pixel_bins().bitplanes();
      for (int k = 0; k < nf; k++) {
        ClippingMap cm;
        cm.width = w;
        cm.height = h;
        cm.clipped.assign(size_t(bp), std::vector<uint8_t>(size_t(w) * h, 0));
        for (size_t ui = 0; ui < units.size(); ui++)
          for (size_t j = 0; j < units[ui].idx.size(); j++) {
            uint32_t s = units[ui].idx[j];
            if (pos[s].k != k) continue;
            for (int plane = 0; plane < bp; plane++)
              cm.clipped[size_t(plane)][size_t(pos[s].y) * w + pos[s].x] =
                  unit_clip[ui][size_t(plane)][j];
          }
        if (fb[v - 1].push_clipping(std::move(cm), cfg.simple_block)) {
          const auto& groups = fb[v - 1].groups;
          const int width = group_id_bits(bp);
          if (encode()) {
            PayloadWriter pw;
            pw.u8(uint8_t(v));
            pw.u16(uint16_t(fr[k]));
            pw.u8(uint8_t(bp));
            pw.u32(uint32_t(groups.size()));
            std::vector<uint8_t> ids(groups.size());
            for (size_t g = 0; g < groups.size(); g++) ids[g] = uint8_t(groups[g] - 1);
            pw.packed(ids, width);
            put_record(RecordType::feedback_map, pw);
            rows[v - 1][fr[k] - 1].bits_feedback += long(groups.size()) * width;
          } else {
            next_record(RecordType::feedback_map);  // re-derived locally
          }
        }
      }
    }
    if (cfg.feedback == FeedbackMode::smart && !td) {
      auto& st = fb[v - 1];
      for (size_t ui = 0; ui < unit_regions.size(); ui++)
        for (int rg : unit_regions[ui]) st.add_request(size_t(rg), unit_batches[ui]);
    }

    if (encode()) {
      for (int k = 0; k < nf; k++) {
        auto& row = rows[v - 1][fr[k] - 1];
        row.psnr_db = psnr(orig(v, fr[k]), dec(v, fr[k]));
        row.si_psnr_fused = psnr_from_mse(wz_mse(si[k].fused.prediction, orig(v, fr[k]), pat[k]));
        row.si_psnr_tec = psnr_from_mse(wz_mse(si[k].tec.prediction, orig(v, fr[k]), pat[k]));
        if (si[k].vec)
          row.si_psnr_vec = psnr_from_mse(wz_mse(si[k].vec->prediction, orig(v, fr[k]), pat[k]));
        row.residual_ber = frame_bits ? frame_err / double(frame_bits) : 0.0;
      }
      rows[v - 1][fr[0] - 1].bits_parity = paired ? pair_parity - pair_parity / 2 : pair_parity;
      rows[v - 1][fr[0] - 1].parity_requests =
          paired ? pair_batches - pair_batches / 2 : pair_batches;
      if (paired) {
        rows[v - 1][fr[1] - 1].bits_parity = pair_parity / 2;
        rows[v - 1][fr[1] - 1].parity_requests = pair_batches / 2;
      }
    }
  }
};

void check_supported(const CodecConfig& cfg) {
  cfg.validate();
  if (cfg.quant.domain == QuantDomain::transform && cfg.feedback != FeedbackMode::off)
    throw std::invalid_argument("transform-domain coding does not support feedback maps");
  if (cfg.quant.domain == QuantDomain::transform && cfg.frame_subtraction)
    throw std::invalid_argument("transform-domain coding does not support frame subtraction");
}

CodecConfig adopt_input(const CodecConfig& base, const MultiViewSequence& input) {
  if (input.views.empty() || input.views[0].frames.empty())
    throw std::invalid_argument("simulate: empty input sequence");
  CodecConfig cfg = base;
  cfg.num_views = input.num_views();
  cfg.num_frames = input.num_frames();
  cfg.width = input.views[0].frames[0].width;
  cfg.height = input.views[0].frames[0].height;
  for (const auto& vs : input.views) {
    if (int(vs.frames.size()) != cfg.num_frames)
      throw std::invalid_argument("simulate: views disagree on frame count");
    for (const auto& f : vs.frames)
      if (f.width != cfg.width || f.height != cfg.height)
        throw std::invalid_argument("simulate: frame dimensions vary");
  }
  return cfg;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

SimResult simulate(const CodecConfig& cfg_in, const MultiViewSequence& input) {
  CodecConfig cfg = adopt_input(cfg_in, input);
  check_supported(cfg);

  SimResult res;
  res.container.config_text = serialize_config(cfg);
  Driver d;
  d.cfg = cfg;
  d.input = &input;
  d.out = &res.container;
  d.run();
  res.decoded = std::move(d.decoded);
  for (size_t v = 0; v < res.decoded.views.size(); v++)
    res.decoded.views[v].chroma = input.views[v].chroma;
  for (auto& per_view : d.rows)
    for (auto& r : per_view) res.stats.push_back(std::move(r));
  return res;
}

MultiViewSequence decode_container(const BitstreamContainer& c) {
  Driver d;
  d.cfg = parse_config(c.config_text);
  check_supported(d.cfg);
  d.in = &c;
  d.run();
  return std::move(d.decoded);
}

std::vector<SiReport> analyze_si(const CodecConfig& cfg_in, const MultiViewSequence& input) {
  CodecConfig cfg = adopt_input(cfg_in, input);
  cfg.validate();
  GopLayout layout = build_gop_layout(cfg.num_views, cfg.num_frames, cfg.gop_length, cfg.order_mode);

  // stand-in decode: KEY cells intra coded, WZ cells recovered exactly
  MultiViewSequence ref = input;
  std::vector<SiReport> reports;
  for (const auto& e : build_schedule(layout)) {
    if (e.intra) {
      Frame recon;
      intra_encode(input.views[size_t(e.view) - 1].frames[size_t(e.f1) - 1], cfg.qp, &recon);
      ref.views[size_t(e.view) - 1].frames[size_t(e.f1) - 1] = std::move(recon);
      continue;
    }
    const bool paired = e.f2 != 0;
    const int nf = paired ? 2 : 1;
    const int fr[2] = {e.f1, e.f2};
    InterleavePattern pat[2];
    BlockGroup key_dec[2];
    for (int k = 0; k < nf; k++)
      pat[k] = InterleavePattern::for_frame(cfg.width, cfg.height, cfg.block_size,
                                            parity_for_frame(fr[k]));
    {
      auto g1 = split_checkerboard(input.views[size_t(e.view) - 1].frames[size_t(fr[0]) - 1], pat[0])
                    .first;
      Frame combined =
          paired ? temporal_interleave(
                       g1, split_checkerboard(
                               input.views[size_t(e.view) - 1].frames[size_t(fr[1]) - 1], pat[1])
                               .first)
                 : pack_key_group(g1);
      Frame recon;
      intra_encode(combined, cfg.qp, &recon);
      if (paired) {
        auto [a, b] = temporal_deinterleave(recon, pat[0], pat[1]);
        key_dec[0] = std::move(a);
        key_dec[1] = std::move(b);
      } else {
        key_dec[0] = unpack_key_group(recon, pat[0]);
      }
    }
    for (int k = 0; k < nf; k++) {
      BlockGroup wz_zero{pat[k], false, cfg.width, cfg.height, {}};
      wz_zero.pixels.assign(size_t(wz_zero.block_count()) * cfg.block_size * cfg.block_size, 0);
      Frame cur = merge_groups(key_dec[k], wz_zero);
      ConcealContext ctx;
      ctx.current = &cur;
      ctx.pattern = pat[k];
      ctx.cfg = cfg.si;
      ReferenceSet rs = reference_frames(e.view, fr[k], layout, e.rank);
      auto& rv = ref.views;
      if (rs.past)
        ctx.temporal_refs.push_back(
            {&rv[size_t(rs.past->view) - 1].frames[size_t(rs.past->frame) - 1],
             fr[k] - rs.past->frame});
      if (rs.future)
        ctx.temporal_refs.push_back(
            {&rv[size_t(rs.future->view) - 1].frames[size_t(rs.future->frame) - 1],
             rs.future->frame - fr[k]});
      for (const FrameId& r : rs.view_refs)
        ctx.view_refs.push_back({&rv[size_t(r.view) - 1].frames[size_t(r.frame) - 1], 1});
      SiBundle si = generate_si(ctx);

      const Frame& origf = input.views[size_t(e.view) - 1].frames[size_t(fr[k]) - 1];
      SiReport rep;
      rep.view = e.view;
      rep.frame = fr[k];
      rep.mse_fused = wz_mse(si.fused.prediction, origf, pat[k]);
      rep.mse_tec = wz_mse(si.tec.prediction, origf, pat[k]);
      if (si.vec) rep.mse_vec = wz_mse(si.vec->prediction, origf, pat[k]);
      reports.push_back(rep);

      auto wz_orig = split_checkerboard(origf, pat[k]).second;
      ref.views[size_t(e.view) - 1].frames[size_t(fr[k]) - 1] = merge_groups(key_dec[k], wz_orig);
    }
  }
  std::sort(reports.begin(), reports.end(), [](const SiReport& a, const SiReport& b) {
    return std::tie(a.view, a.frame) < std::tie(b.view, b.frame);
  });
  return reports;
}

std::string si_csv(const std::vector<SiReport>& rows) {
  std::string out = "view,frame,mse_fused,psnr_fused,mse_tec,psnr_tec,mse_vec,psnr_vec\n";
  for (const auto& r : rows) {
    out += std::to_string(r.view) + ',' + std::to_string(r.frame) + ',';
    out += fmt4(r.mse_fused) + ',' + fmt4(psnr_from_mse(r.mse_fused)) + ',';
    out += fmt4(r.mse_tec) + ',' + fmt4(psnr_from_mse(r.mse_tec)) + ',';
    if (r.mse_vec >= 0.0)
      out += fmt4(r.mse_vec) + ',' + fmt4(psnr_from_mse(r.mse_vec));
    else
      out += ',';
    out += '\n';
  }
  return out;
}

std::vector<RdPoint> rd_sweep(const CodecConfig& base, const MultiViewSequence& input) {
  std::vector<RdPoint> out;
  for (const RatePoint& rp : kRatePoints) {
    CodecConfig cfg = base;
    cfg.qp = rp.qp;
    cfg.quant.domain = QuantDomain::pixel;
    cfg.quant.levels = rp.levels;
    SimResult res = simulate(cfg, input);
    RdPoint pt;
    pt.qp = rp.qp;
    pt.levels = rp.levels;
    pt.kbps = double(total_bits(res.stats)) * cfg.fps / double(input.num_frames()) / 1000.0;
    double acc = 0.0;
    for (const auto& r : res.stats) acc += r.psnr_db;
    pt.mean_psnr_db = res.stats.empty() ? 0.0 : acc / double(res.stats.size());
    out.push_back(pt);
  }
  return out;
}

}  // namespace mvdvc
