#include <set>

#include "doctest.h"
#include "rlab/common/error.hpp"
#include "rlab/common/parallel.hpp"
#include "rlab/common/rng.hpp"

using namespace rlab;

TEST_SUITE("common") {
  TEST_CASE("rng is reproducible and streams differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  }

  TEST_CASE("uniform and below stay in range") {
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.below(7) < 7);
    }
  }

  TEST_CASE("shuffle is a permutation") {
    Rng r(5);
    auto v = iota_indices(50);
    r.shuffle(v);
    std::set<std::size_t> s(v.begin(), v.end());
    CHECK(s.size() == 50);
    CHECK(*s.rbegin() == 49);
  }

  TEST_CASE("categorical respects zero weights") {
    Rng r(9);
    std::vector<double> w{0.0, 1.0, 0.0};
    for (int i = 0; i < 100; ++i) CHECK(r.categorical(w) == 1);
  }

  TEST_CASE("fnv1a known value") {
    CHECK(fnv1a("", 0) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
  }

  TEST_CASE("parallel_for fills every slot") {
    std::vector<int> out(1000, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 2);
    CHECK(worker_count() >= 1);
  }

  TEST_CASE("errors carry their kind") {
    try {
      throw SizeError("too big");
    } catch (const Error& e) {
      CHECK(e.kind() == "SizeError");
      CHECK(std::string(e.what()) == "SizeError: too big");
    }
  }
}
