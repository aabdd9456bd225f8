#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "vnoip/cascade.hpp"
#include "vnoip/errors.hpp"
#include "vnoip/rng.hpp"
#include "vnoip/sample.hpp"
#include "vnoip/synth.hpp"

using namespace vnoip;

namespace {

EmbeddingTable random_table(std::int64_t rows, std::int64_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable t = EmbeddingTable::zeros(rows, dim);
  for (double& v : t.values) v = rng.normal();
  return t;
}

bool same_cascade(const Cascade& a, const Cascade& b) {
  if (a.id != b.id || a.root != b.root || a.publish_time != b.publish_time) return false;
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    if (a.events[i].parent != b.events[i].parent || a.events[i].child != b.events[i].child ||
        a.events[i].time != b.events[i].time) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("parse minimal cascade line") {
  const Cascade c = parse_cascade_line("7\t1\t0\t2\t1:0 1/2:5", 1);
  CHECK(c.id == 7);
  CHECK(c.root == 1);
  CHECK(c.publish_time == 0.0);
  REQUIRE(c.events.size() == 1);
  CHECK(c.events[0].parent == 1);
  CHECK(c.events[0].child == 2);
  CHECK(c.events[0].time == 5.0);
}

TEST_CASE("parse_dataset on an empty file yields an empty list") {
  const auto path = std::filesystem::temp_directory_path() / "vnoip_empty.txt";
  std::ofstream(path.string()).close();
  CHECK(parse_dataset(path.string()).empty());
  std::filesystem::remove(path);
}

TEST_CASE("parse errors carry line numbers") {
  // Declared 3 paths, found 2.
  try {
    parse_cascade_line("7\t1\t0\t3\t1:0 1/2:5", 4);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  // Parent 5 never appeared: ordering error.
  CHECK_THROWS_AS(parse_cascade_line("7\t1\t0\t2\t1:0 5/2:5", 1), ParseError);
  // Missing colon.
  CHECK_THROWS_AS(parse_cascade_line("7\t1\t0\t2\t1:0 1/2", 1), ParseError);
  // Decreasing timestamps.
  CHECK_THROWS_AS(parse_cascade_line("7\t1\t0\t3\t1:0 1/2:5 1/3:4", 1), ParseError);
  // Bad field count.
  CHECK_THROWS_AS(parse_cascade_line("7\t1\t0", 1), ParseError);
}

TEST_CASE("synthetic corpus round-trips through the text format losslessly") {
  GenConfig cfg;
  cfg.num_users = 60;
  cfg.base_rate = 0.5;
  cfg.horizon = 80.0;
  cfg.branching = 0.5;
  cfg.seed = 3;
  auto [graph, cascades] = generate_synthetic(cfg);
  REQUIRE(cascades.size() == 40);  // round(base_rate * horizon)

  const auto path = std::filesystem::temp_directory_path() / "vnoip_roundtrip.txt";
  save_dataset(cascades, path.string());
  const std::vector<Cascade> back = parse_dataset(path.string());
  REQUIRE(back.size() == cascades.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(same_cascade(back[i], cascades[i]));
  }
  std::filesystem::remove(path);
}

TEST_CASE("generator basics") {
  GenConfig cfg;
  cfg.num_users = 30;
  cfg.base_rate = 0.2;
  cfg.horizon = 50.0;
  cfg.seed = 9;

  SUBCASE("zero branching leaves every cascade as the root alone") {
    cfg.branching = 0.0;
    auto [graph, cascades] = generate_synthetic(cfg);
    for (const Cascade& c : cascades) CHECK(c.events.empty());
  }

  SUBCASE("same seed reproduces the corpus exactly") {
    cfg.branching = 0.6;
    auto [g1, c1] = generate_synthetic(cfg);
    auto [g2, c2] = generate_synthetic(cfg);
    CHECK(g1.edges == g2.edges);
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(same_cascade(c1[i], c2[i]));
  }

  SUBCASE("supercritical branching is rejected") {
    cfg.branching = 1.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  }

  SUBCASE("events are sorted and parents precede children") {
    cfg.branching = 0.8;
    cfg.base_rate = 1.0;
    auto [graph, cascades] = generate_synthetic(cfg);
    for (const Cascade& c : cascades) {
      std::set<std::int64_t> seen{c.root};
      double prev = c.publish_time;
      for (const CascadeEvent& e : c.events) {
        CHECK(e.time >= prev);
        CHECK(seen.count(e.parent) == 1);
        prev = e.time;
        seen.insert(e.child);
      }
    }
  }
}

TEST_CASE("Monte-Carlo offspring mean matches the branching factor") {
  GenConfig cfg;
  cfg.num_users = 200;
  cfg.branching = 0.5;
  cfg.decay = 1.0;
  cfg.horizon = 100.0;  // events live far from the horizon, truncation negligible
  cfg.base_rate = 120.0;
  cfg.seed = 42;
  auto [graph, cascades] = generate_synthetic(cfg);

  // Each event (including the root) is a potential parent; children are the
  // recorded events.
  std::int64_t children = 0, parents = 0;
  for (const Cascade& c : cascades) {
    children += static_cast<std::int64_t>(c.events.size());
    parents += static_cast<std::int64_t>(c.events.size()) + 1;
  }
  REQUIRE(parents >= 10000);
  const double mean_offspring = static_cast<double>(children) / static_cast<double>(parents);
  CHECK(mean_offspring == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("filter_and_split follows the protocol") {
  // Build cascades with controllable observed size: k events at t = 1..k.
  auto make = [](std::int64_t id, int k) {
    Cascade c;
    c.id = id;
    c.root = 0;
    for (int i = 0; i < k; ++i) {
      c.events.push_back(CascadeEvent{0, i + 1, static_cast<double>(i + 1)});
    }
    return c;
  };

  SUBCASE("a cascade with 9 observed participants is excluded") {
    std::vector<Cascade> cs{make(0, 8), make(1, 9), make(2, 50)};
    // observed participants = root + events <= t_obs
    const DatasetSplit split = filter_and_split(cs, 100.0, 10, {1.0, 0.0, 0.0}, 1);
    REQUIRE(split.train.size() == 2);  // 9-participant cascade (8 events) excluded
    for (const Cascade& c : split.train) CHECK(c.observed_participants(100.0) >= 10);
  }

  SUBCASE("100 surviving cascades split 70/15/15") {
    std::vector<Cascade> cs;
    for (std::int64_t i = 0; i < 100; ++i) cs.push_back(make(i, 20));
    const DatasetSplit split = filter_and_split(cs, 100.0, 10, {}, 7);
    CHECK(split.train.size() == 70);
    CHECK(split.val.size() == 15);
    CHECK(split.test.size() == 15);
  }

  SUBCASE("same seed gives identical membership") {
    std::vector<Cascade> cs;
    for (std::int64_t i = 0; i < 40; ++i) cs.push_back(make(i, 15));
    const DatasetSplit a = filter_and_split(cs, 100.0, 10, {}, 5);
    const DatasetSplit b = filter_and_split(cs, 100.0, 10, {}, 5);
    auto ids = [](const std::vector<Cascade>& v) {
      std::vector<std::int64_t> out;
      for (const Cascade& c : v) out.push_back(c.id);
      return out;
    };
    CHECK(ids(a.train) == ids(b.train));
    CHECK(ids(a.val) == ids(b.val));
    CHECK(ids(a.test) == ids(b.test));
  }

  SUBCASE("ratios must sum to one") {
    std::vector<Cascade> cs{make(0, 20)};
    CHECK_THROWS_AS(filter_and_split(cs, 100.0, 10, {0.5, 0.1, 0.1}, 1), ConfigError);
  }

  SUBCASE("filtering never removes a cascade with >= 10 observed participants") {
    std::vector<Cascade> cs;
    for (std::int64_t i = 0; i < 30; ++i) cs.push_back(make(i, 9 + static_cast<int>(i % 5)));
    const DatasetSplit split = filter_and_split(cs, 100.0, 10, {}, 3);
    std::size_t expected = 0;
    for (const Cascade& c : cs) {
      if (c.observed_participants(100.0) >= 10) ++expected;
    }
    CHECK(split.train.size() + split.val.size() + split.test.size() == expected);
  }
}

TEST_CASE("build_sample featurization") {
  // Root at t=0 plus events at 2 and 5.
  Cascade c;
  c.id = 11;
  c.root = 0;
  c.events = {{0, 1, 2.0}, {1, 2, 5.0}, {2, 3, 8.0}};
  const EmbeddingTable table = random_table(4, 8, 77);

  SUBCASE("context popularity counts cumulatively") {
    const CascadeSample s = build_sample(c, table, 6.0, 10.0, 4);
    // context: (0,1), (2,2), (5,3), endpoint (6,3); times normalized by 10.
    REQUIRE(s.context.size() == 4);
    CHECK(s.context[0].popularity == 1.0);
    CHECK(s.context[1].popularity == 2.0);
    CHECK(s.context[2].popularity == 3.0);
    CHECK(s.context[3].popularity == 3.0);
    CHECK(s.context[3].time == doctest::Approx(0.6));
    CHECK(s.observed_popularity == 3.0);
  }

  SUBCASE("future grid divides the horizon evenly") {
    const CascadeSample s = build_sample(c, table, 6.0, 10.0, 4);
    REQUIRE(s.grid_times.size() == 4);
    for (int k = 1; k <= 4; ++k) {
      CHECK(s.grid_times[static_cast<std::size_t>(k - 1)] ==
            doctest::Approx((6.0 + k) / 10.0).epsilon(1e-12));
    }
    // Event at 8 falls into the future window: delta = P(10) - P(6) = 4 - 3.
    CHECK(s.delta_popularity == 1.0);
  }

  SUBCASE("saturated cascade has zero increment and a flat target tail") {
    Cascade done = c;
    done.events.pop_back();  // last event now at t = 5 < t_o
    const CascadeSample s = build_sample(done, table, 6.0, 10.0, 4);
    CHECK(s.delta_popularity == 0.0);
    const auto grid_truth = s.target_grid_popularity();
    for (double v : grid_truth) CHECK(v == s.observed_popularity);
  }

  SUBCASE("horizon must exceed the observation time") {
    CHECK_THROWS_AS(build_sample(c, table, 6.0, 6.0, 4), ConfigError);
  }

  SUBCASE("target trajectory extends the context and never decreases") {
    const CascadeSample s = build_sample(c, table, 6.0, 10.0, 8);
    const auto& tgt = s.target_trajectory();
    REQUIRE(tgt.size() == s.context.size() + 8);
    for (std::size_t i = 0; i < s.context.size(); ++i) {
      CHECK(tgt[i].time == s.context[i].time);
      CHECK(tgt[i].popularity == s.context[i].popularity);
    }
    for (std::size_t i = 1; i < tgt.size(); ++i) CHECK(tgt[i].popularity >= tgt[i - 1].popularity);
    CHECK(s.delta_popularity ==
          tgt.back().popularity - s.context.back().popularity);
  }

  SUBCASE("inference mode zeroes and guards the target") {
    const CascadeSample s = build_sample(c, table, 6.0, 10.0, 4, {}, true);
    CHECK(s.inference());
    CHECK_THROWS_AS(s.target_trajectory(), LeakError);
    CHECK_THROWS_AS(s.target_grid_popularity(), LeakError);
    // Labels remain available to the evaluator.
    CHECK(s.delta_popularity == 1.0);
  }

  SUBCASE("sequences truncate at 100 events") {
    Cascade big;
    big.id = 1;
    big.root = 0;
    for (int i = 0; i < 150; ++i) {
      big.events.push_back(CascadeEvent{0, 1 + (i % 3), 0.01 * (i + 1)});
    }
    const EmbeddingTable t4 = random_table(4, 8, 5);
    const CascadeSample s = build_sample(big, t4, 5.0, 10.0, 4);
    CHECK(s.users.size() == 101);  // root + first 100 events
    CHECK(s.times.size() == 101);
    CHECK(s.global_view.dim(0) == 101);
    // Observed popularity still counts every observed event.
    CHECK(s.observed_popularity == 151.0);
  }

  SUBCASE("users missing from the global table get zero rows") {
    Cascade stray = c;
    stray.events[2].child = 9;  // outside the 4-row table
    const CascadeSample s = build_sample(stray, table, 10.0, 20.0, 4);
    for (std::int64_t j = 0; j < s.global_view.dim(1); ++j) {
      CHECK(s.global_view(3, j) == 0.0);
    }
  }
}
