#include <doctest.h>

#include <atomic>
#include <set>
#include <stdexcept>

#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"
#include "kinlab/common/random.hpp"
#include "kinlab/common/stats.hpp"

using namespace kinlab;

TEST_SUITE("common") {
  TEST_CASE("derived seeds depend on the path only") {
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
    CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
    auto a = make_rng(3, {4});
    auto b = make_rng(3, {4});
    CHECK(a() == b());
  }

  TEST_CASE("sample_index skips zero-mass entries") {
    auto rng = make_rng(1, {});
    std::vector<double> p{0.0, 0.25, 0.0, 0.75};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 20000; ++i) ++counts[sample_index(p, rng)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(counts[1] / 20000.0 == doctest::Approx(0.25).epsilon(0.05));
    std::vector<double> short_mass{0.3, 0.3};
    for (int i = 0; i < 100; ++i) CHECK(sample_index(short_mass, rng) <= 1);
  }

  TEST_CASE("total variation and Hoeffding width") {
    CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
    CHECK(total_variation({1.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(hoeffding_half_width(0, 0.05) == 1.0);
    CHECK(hoeffding_half_width(2000, 0.05) == doctest::Approx(std::sqrt(std::log(40.0) / 4000.0)));
  }

  TEST_CASE("parallel_for covers every index once and rethrows") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); }, 4);
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) {
                      if (i == 57) throw std::runtime_error("boom");
                    }, 3),
                    std::runtime_error);
  }

  TEST_CASE("budget errors carry their count") {
    EnumerationBudgetExceeded e("policies", 1e7, 1e6);
    CHECK(e.count() == 1e7);
    CHECK(e.budget() == 1e6);
    SchemaError s("/hyper/N", "expected integer");
    CHECK(s.path() == "/hyper/N");
  }
}
