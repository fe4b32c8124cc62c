#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mvdvc/subtraction.hpp"

using namespace mvdvc;

namespace {

Frame noise_frame(int w, int h, uint32_t seed) {
  Frame f(w, h);
  std::mt19937 rng(seed);
  for (auto& p : f.luma) p = uint8_t(rng() % 256);
  return f;
}

ActivityMap uniform_map(int w, int h, uint8_t flag, int mb = 16) {
  ActivityMap m;
  m.grid_w = (w + mb - 1) / mb;
  m.grid_h = (h + mb - 1) / mb;
  m.dynamic.assign(size_t(m.grid_w) * m.grid_h, flag);
  return m;
}

void paint_square(Frame& f, int sx, int sy, int side, uint8_t v) {
  for (int y = sy; y < sy + side; y++)
    for (int x = sx; x < sx + side; x++) f.at(x, y) = v;
}

}  // namespace

TEST_CASE("identical frames mark nothing") {
  Frame a = noise_frame(64, 48, 1);
  auto m = mark_dynamic(a, a, 512);
  CHECK(m.grid_w == 4);
  CHECK(m.grid_h == 3);
  CHECK(m.count() == 0);
}

TEST_CASE("a full-frame change marks every macroblock") {
  Frame prev(64, 48, 0), cur(64, 48, 255);
  auto m = mark_dynamic(cur, prev, 512);
  CHECK(m.count() == m.grid_w * m.grid_h);
}

TEST_CASE("threshold is strict") {
  Frame prev(16, 16, 0), cur(16, 16, 0);
  cur.at(0, 0) = 255;
  cur.at(1, 0) = 255;
  cur.at(2, 0) = 2;  // SAD exactly 512
  CHECK(mark_dynamic(cur, prev, 512).count() == 0);
  cur.at(3, 0) = 1;
  CHECK(mark_dynamic(cur, prev, 512).count() == 1);
}

TEST_CASE("moving square marks exactly the macroblocks it enters or leaves") {
  const int w = 352, h = 288, side = 64;
  const int ox = 100, oy = 100, nx = 116, ny = 108;
  Frame prev(w, h, 0), cur(w, h, 0);
  paint_square(prev, ox, oy, side, 200);
  paint_square(cur, nx, ny, side, 200);
  auto m = mark_dynamic(cur, prev, 512);

  auto in_old = [&](int x, int y) {
    return x >= ox && x < ox + side && y >= oy && y < oy + side;
  };
  auto in_new = [&](int x, int y) {
    return x >= nx && x < nx + side && y >= ny && y < ny + side;
  };
  for (int gj = 0; gj < m.grid_h; gj++) {
    for (int gi = 0; gi < m.grid_w; gi++) {
      // every pixel covered by exactly one of the two positions differs
      // by 200, so the macroblock trips the threshold at three such pixels
      int moved = 0;
      for (int y = gj * 16; y < (gj + 1) * 16; y++)
        for (int x = gi * 16; x < (gi + 1) * 16; x++) moved += in_old(x, y) != in_new(x, y);
      CHECK(m.at(gi, gj) == (moved * 200 > 512));
    }
  }
  CHECK(m.count() > 0);
  CHECK(m.count() < m.grid_w * m.grid_h);
}

TEST_CASE("updated reference passes the I frame through when nothing moves") {
  Frame iframe = noise_frame(64, 64, 2);
  Frame b1 = noise_frame(64, 64, 3);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  auto m = uniform_map(64, 64, 0);
  Frame ref = build_updated_reference(iframe, b1, p1, m);
  CHECK(ref.luma == iframe.luma);
}

TEST_CASE("updated reference overlays every KEY cell when everything moves") {
  Frame iframe = noise_frame(64, 64, 4);
  Frame b1 = noise_frame(64, 64, 5);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  Frame ref = build_updated_reference(iframe, b1, p1, uniform_map(64, 64, 1));
  for (int bi = 0; bi < 4; bi++)
    for (int bj = 0; bj < 4; bj++) {
      const Frame& want = p1.is_key(bi, bj) ? b1 : iframe;
      for (int y = bi * 16; y < bi * 16 + 16; y++)
        for (int x = bj * 16; x < bj * 16 + 16; x++) REQUIRE(ref.at(x, y) == want.at(x, y));
    }
}

TEST_CASE("one dynamic KEY block changes exactly its own pixels") {
  Frame iframe(64, 64, 50);
  Frame b1(64, 64, 90);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  REQUIRE(p1.is_key(1, 1));
  auto m = uniform_map(64, 64, 0);
  m.dynamic[size_t(1) * m.grid_w + 1] = 1;
  Frame ref = build_updated_reference(iframe, b1, p1, m);
  int diffs = 0;
  for (int y = 0; y < 64; y++)
    for (int x = 0; x < 64; x++)
      if (ref.at(x, y) != iframe.at(x, y)) {
        diffs++;
        CHECK(x >= 16);
        CHECK(x < 32);
        CHECK(y >= 16);
        CHECK(y < 32);
        CHECK(ref.at(x, y) == 90);
      }
  CHECK(diffs == 256);
}

TEST_CASE("static macroblocks restore to exact reference copies") {
  Frame decoded = noise_frame(48, 48, 6);
  Frame reference = noise_frame(48, 48, 7);
  Frame before = decoded;
  auto m = uniform_map(48, 48, 0);
  m.dynamic[4] = 1;  // block (1,1) of the 3x3 grid stays as decoded
  restore_static(decoded, m, reference);
  for (int y = 0; y < 48; y++)
    for (int x = 0; x < 48; x++) {
      bool dyn = x >= 16 && x < 32 && y >= 16 && y < 32;
      REQUIRE(decoded.at(x, y) == (dyn ? before.at(x, y) : reference.at(x, y)));
    }
}

TEST_CASE("dynamic WZ positions enumerate the moving half of the checkerboard") {
  auto p = InterleavePattern::for_frame(64, 48, 16, Parity::odd);
  auto all = dynamic_wz_positions(p, uniform_map(64, 48, 1));
  CHECK(int(all.size()) == p.wz_count() * 16 * 16);
  for (auto [x, y] : all) CHECK_FALSE(p.is_key(y / 16, x / 16));
  CHECK(dynamic_wz_positions(p, uniform_map(64, 48, 0)).empty());

  // mixed map: only WZ cells under dynamic macroblocks appear
  REQUIRE_FALSE(p.is_key(0, 0));
  auto m = uniform_map(64, 48, 0);
  m.dynamic[0] = 1;
  auto some = dynamic_wz_positions(p, m);
  REQUIRE(int(some.size()) == 256);
  for (auto [x, y] : some) {
    CHECK(x < 16);
    CHECK(y < 16);
  }
}

TEST_CASE("a fully static pair packs to maps alone") {
  Frame b1 = noise_frame(64, 64, 8);
  Frame b2 = noise_frame(64, 64, 9);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  auto p2 = InterleavePattern::for_frame(64, 64, 16, Parity::odd);
  auto st = uniform_map(64, 64, 0);
  PackedPair pk = pack_dynamic(b1, b2, p1, p2, st, st);
  CHECK(pk.wz.empty());
  CHECK(pk.fill == 128);
  for (uint8_t px : pk.combined_key.luma) REQUIRE(px == 128);
}

TEST_CASE("a fully dynamic pair reduces to the baseline joint KEY frame") {
  Frame b1 = noise_frame(64, 64, 10);
  Frame b2 = noise_frame(64, 64, 11);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  auto p2 = InterleavePattern::for_frame(64, 64, 16, Parity::odd);
  auto dyn = uniform_map(64, 64, 1);
  PackedPair pk = pack_dynamic(b1, b2, p1, p2, dyn, dyn);

  Frame baseline =
      temporal_interleave(split_checkerboard(b1, p1).first, split_checkerboard(b2, p2).first);
  CHECK(pk.combined_key.luma == baseline.luma);

  std::vector<uint8_t> want;
  for (auto [f, p] : {std::pair{&b1, &p1}, std::pair{&b2, &p2}})
    for (int bi = 0; bi < p->grid_h; bi++)
      for (int bj = 0; bj < p->grid_w; bj++) {
        if (p->is_key(bi, bj)) continue;
        for (int y = bi * 16; y < bi * 16 + 16; y++)
          for (int x = bj * 16; x < bj * 16 + 16; x++) want.push_back(f->at(x, y));
      }
  CHECK(pk.wz == want);
}

TEST_CASE("static slots take the mean of the dynamic blocks") {
  Frame b1(64, 64, 0), b2(64, 64, 0);
  auto p1 = InterleavePattern::for_frame(64, 64, 16, Parity::even);
  auto p2 = InterleavePattern::for_frame(64, 64, 16, Parity::odd);
  auto m1 = uniform_map(64, 64, 0);
  auto m2 = uniform_map(64, 64, 0);
  m1.dynamic[0] = 1;  // (0,0) is KEY under even parity
  REQUIRE(p1.is_key(0, 0));
  // alternate 70/84 inside the dynamic KEY cell: mean 77
  for (int y = 0; y < 16; y++)
    for (int x = 0; x < 16; x++) b1.at(x, y) = ((x + y) & 1) ? 70 : 84;
  PackedPair pk = pack_dynamic(b1, b2, p1, p2, m1, m2);
  CHECK(pk.fill == 77);
  CHECK(pk.combined_key.at(0, 0) == 84);
  CHECK(pk.combined_key.at(63, 63) == 77);
  CHECK(pk.combined_key.at(16, 0) == 77);  // b2's KEY slot, static
}
