#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "mvdvc/feedback.hpp"

using namespace mvdvc;

namespace {

ClippingMap empty_map(int w, int h, int bp) {
  ClippingMap m;
  m.width = w;
  m.height = h;
  m.clipped.assign(size_t(bp), std::vector<uint8_t>(size_t(w) * h, 0));
  return m;
}

}  // namespace

TEST_CASE("three bitplanes split the map into four groups") {
  auto m = empty_map(64, 32, 3);
  m.clipped[0][5] = 1;                          // block (0,0) clips at plane 1
  m.clipped[1][size_t(3) * 64 + 20] = 1;        // block (0,1) at plane 2
  m.clipped[2][size_t(20) * 64 + 40] = 1;       // block (1,2) at plane 3
  std::vector<ClippingMap> window{m};
  auto groups = assign_simple_groups(window);

  REQUIRE(groups.size() == 8);  // 4x2 grid of 16x16 blocks
  CHECK(*std::max_element(groups.begin(), groups.end()) == 4);
  CHECK(groups[0] == 1);
  CHECK(groups[1] == 2);
  CHECK(groups[4 + 2] == 3);
  CHECK(groups[3] == 4);  // never clipped
  for (int g : groups) CHECK((g >= 1 && g <= 4));
}

TEST_CASE("smallest clipped plane wins inside a block") {
  auto m = empty_map(16, 16, 3);
  m.clipped[2][0] = 1;
  m.clipped[0][200] = 1;
  std::vector<ClippingMap> window{m};
  CHECK(assign_simple_groups(window) == std::vector<int>{1});
}

TEST_CASE("clipping anywhere in the window counts") {
  std::vector<ClippingMap> window;
  for (int f = 0; f < 12; f++) window.push_back(empty_map(32, 16, 2));
  window[7].clipped[1][size_t(4) * 32 + 9] = 1;  // frame 7, plane 2, block 0
  auto groups = assign_simple_groups(window);
  CHECK(groups == std::vector<int>{2, 3});
}

TEST_CASE("smart order ranks by descending requests with raster ties") {
  std::vector<long> counts{5, 2, 7};
  CHECK(smart_order(counts) == std::vector<int>{2, 0, 1});

  std::vector<long> zeros(9, 0);  // no history yet: raster
  auto first = smart_order(zeros);
  for (int i = 0; i < 9; i++) CHECK(first[i] == i);

  std::vector<long> equal(6, 3);
  auto tied = smart_order(equal);
  for (int i = 0; i < 6; i++) CHECK(tied[i] == i);
}

TEST_CASE("smart order is a permutation") {
  std::mt19937 rng(17);
  std::vector<long> counts(40);
  for (auto& c : counts) c = long(rng() % 8);
  auto order = smart_order(counts);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 40; i++) CHECK(sorted[i] == i);
  for (size_t i = 1; i < order.size(); i++) {
    CHECK(counts[order[i - 1]] >= counts[order[i]]);
    if (counts[order[i - 1]] == counts[order[i]]) CHECK(order[i - 1] < order[i]);
  }
}

TEST_CASE("map overhead is two bits per block for four groups") {
  CHECK(feedback_overhead_bits(FeedbackMode::simple, 99, 3) == 198);
  CHECK(feedback_overhead_bits(FeedbackMode::smart, 99, 3) == 0);
  CHECK(feedback_overhead_bits(FeedbackMode::off, 99, 3) == 0);
  CHECK(feedback_overhead_bits(FeedbackMode::simple, 99, 1) == 99);
  CHECK(feedback_overhead_bits(FeedbackMode::simple, 10, 7) == 30);
}

TEST_CASE("short groups merge forward, a short tail merges backward") {
  std::vector<long> a{50, 100};
  CHECK(merge_small_groups(a, 96) == std::vector<int>{0, 2, 2});

  std::vector<long> b{100, 50};
  CHECK(merge_small_groups(b, 96) == std::vector<int>{0, 1, 1});

  std::vector<long> c{40, 40, 40};
  CHECK(merge_small_groups(c, 96) == std::vector<int>{0, 3, 3, 3});

  std::vector<long> d{200, 300, 96};
  CHECK(merge_small_groups(d, 96) == std::vector<int>{0, 1, 2, 3});

  std::vector<long> e{10, 10};  // everything short: one combined block
  CHECK(merge_small_groups(e, 96) == std::vector<int>{0, 2, 2});

  std::vector<long> f{96, 10, 96, 10};
  CHECK(merge_small_groups(f, 96) == std::vector<int>{0, 1, 3, 3, 3});
}

TEST_CASE("merged runs stay contiguous and big enough") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 50; trial++) {
    int n = 1 + int(rng() % 8);
    std::vector<long> bits(n);
    long total = 0;
    for (auto& b : bits) {
      b = long(rng() % 200);
      total += b;
    }
    auto merged = merge_small_groups(bits, 96);
    std::vector<long> run(size_t(n) + 1, 0);
    int runs = 0;
    for (int g = 1; g <= n; g++) {
      CHECK((merged[g] >= 1 && merged[g] <= n));
      if (g > 1) CHECK(merged[g - 1] <= merged[g]);
      CHECK(merged[merged[g]] == merged[g]);  // run ids name one of their members
      run[merged[g]] += bits[g - 1];
      runs += merged[g] == g;
    }
    if (total < 96)
      CHECK(runs == 1);
    else
      for (int g = 1; g <= n; g++)
        if (merged[g] == g) CHECK(run[g] >= 96);
  }
}

TEST_CASE("state refreshes groups once per window") {
  FeedbackState st;
  st.mode = FeedbackMode::simple;
  st.window = 3;
  for (int f = 0; f < 2; f++) {
    CHECK_FALSE(st.push_clipping(empty_map(32, 32, 2)));
    CHECK(st.groups.empty());
  }
  auto m = empty_map(32, 32, 2);
  m.clipped[0][0] = 1;
  CHECK(st.push_clipping(m));
  CHECK(st.updates == 1);
  CHECK(st.groups == std::vector<int>{1, 3, 3, 3});
  CHECK(st.group_count == 3);
  CHECK(st.buffer.empty());

  // next window starts clean: the old clip is forgotten
  for (int f = 0; f < 2; f++) CHECK_FALSE(st.push_clipping(empty_map(32, 32, 2)));
  CHECK(st.push_clipping(empty_map(32, 32, 2)));
  CHECK(st.updates == 2);
  CHECK(st.groups == std::vector<int>{3, 3, 3, 3});
}

TEST_CASE("mirrored counters accumulate per block") {
  FeedbackState enc, dec;
  enc.mode = dec.mode = FeedbackMode::smart;
  std::mt19937 rng(9);
  for (int frame = 0; frame < 5; frame++) {
    for (size_t b = 0; b < 12; b++) {
      long req = long(rng() % 4);
      enc.add_request(b, req);
      dec.add_request(b, req);
    }
    CHECK(enc.counters == dec.counters);
    CHECK(smart_order(enc.counters) == smart_order(dec.counters));
  }
}
