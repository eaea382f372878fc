#include <doctest.h>

#include "../support/generators.hpp"
#include "dpl/stochastic.hpp"

using namespace dpl;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

Process make(Matrix k, std::vector<int> map, std::optional<Row> init = std::nullopt) {
  Process p;
  p.n = int(k.size());
  p.kernel = std::move(k);
  p.map = std::move(map);
  p.init = std::move(init);
  return p;
}

Matrix swap_kernel() { return {{q(0), q(1)}, {q(1), q(0)}}; }
Matrix uniform2() { return {{q(1, 2), q(1, 2)}, {q(1, 2), q(1, 2)}}; }
Row uniform_row() { return {q(1, 2), q(1, 2)}; }

bool row_stochastic(const Matrix& m) {
  for (auto& r : m) {
    Rational s = 0;
    for (auto& x : r) {
      if (x < 0) return false;
      s += x;
    }
    if (s != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("n-step kernels") {
  Process swap = make(swap_kernel(), {0, 1}, uniform_row());
  CHECK(n_step(swap, 2, T0Mode::WithInit) == identity_matrix(2));
  Process u = make(uniform2(), {0, 1}, Row{q(1), q(0)});
  CHECK(n_step(u, 1, T0Mode::WithInit) == u.kernel);
  CHECK(n_step(u, 5, T0Mode::WithInit) == u.kernel);
  CHECK(n_step(u, 0, T0Mode::WithInit) == Matrix{{q(1), q(0)}});
  CHECK(n_step(u, 0, T0Mode::Dirac) == identity_matrix(2));
  CHECK_THROWS(n_step(make(uniform2(), {0, 1}), 0, T0Mode::WithInit));
}

TEST_CASE("n-step kernels compose and stay stochastic") {
  testing::Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    Process p = random_process(rng(), testing::pick(rng, 1, 4), 4, false);
    NStepKernel k(p);
    for (unsigned m = 1; m <= 3; ++m)
      for (unsigned n = 1; n <= 3; ++n) {
        CHECK(row_stochastic(k.power(m)));
        CHECK(k.power(m + n) == multiply(k.power(m), k.power(n)));
      }
  }
}

TEST_CASE("stationarity") {
  CHECK(is_stationary(make(swap_kernel(), {0, 1}, uniform_row())));
  CHECK_FALSE(is_stationary(make(swap_kernel(), {0, 1}, Row{q(1), q(0)})));
  CHECK(is_stationary(make(identity_matrix(2), {0, 1}, Row{q(1, 3), q(2, 3)})));
}

TEST_CASE("ergodicity") {
  CHECK(is_ergodic(make(uniform2(), {1, 0})));
  CHECK_FALSE(is_ergodic(make(uniform2(), {0, 1})));
  CHECK(is_ergodic(make({{q(1), q(0)}, {q(1), q(0)}}, {0, 1})));
}

TEST_CASE("mixing") {
  CHECK(is_mixing(make({{q(1)}}, {0})));
  CHECK(is_mixing(make({{q(1), q(0)}, {q(1), q(0)}}, {0, 1})));
  CHECK_FALSE(is_mixing(make(uniform2(), {0, 1})));
  CHECK_FALSE(is_mixing(make(uniform2(), {1, 0})));
}

TEST_CASE("irreducibility") {
  CHECK(is_irreducible(make(swap_kernel(), {0, 1}, uniform_row())));
  CHECK_FALSE(is_irreducible(make(identity_matrix(2), {0, 1}, uniform_row())));
  CHECK(is_irreducible(make({{q(1), q(0)}, {q(1), q(0)}}, {0, 1}, Row{q(1), q(0)})));
}

TEST_CASE("recurrence") {
  CHECK(is_recurrent(make(swap_kernel(), {0, 1}, uniform_row())));
  CHECK_FALSE(is_recurrent(make({{q(1, 2), q(1, 2)}, {q(0), q(1)}}, {0, 1}, uniform_row())));
  CHECK(is_recurrent(make({{q(0), q(1)}, {q(1, 2), q(1, 2)}}, {0, 1}, uniform_row())));
  Process absorbing = make({{q(1, 2), q(1, 2)}, {q(0), q(1)}}, {0, 1}, uniform_row());
  CHECK(potential_diverges(absorbing, 0, 0b10));
  CHECK_FALSE(potential_diverges(absorbing, 0, 0b01));
  CHECK(recurrent_states(absorbing) == 0b10);
}

TEST_CASE("irreducibility agrees with the subset definition") {
  testing::Rng rng(2);
  for (int i = 0; i < 400; ++i) {
    int n = testing::pick(rng, 1, 4);
    Process p = random_process(rng(), n, 2, true);
    INFO(i);
    CHECK(is_irreducible(p) == irreducible_by_subsets(p));
  }
}

TEST_CASE("strongly connected chains with positive init are recurrent") {
  testing::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    int n = testing::pick(rng, 1, 5);
    Process p = random_process(rng(), n, 3, false);
    // a cycle through every state plus random mass keeps the chain strongly connected
    for (int w = 0; w < n; ++w) {
      for (auto& x : p.kernel[w]) x /= 2;
      p.kernel[w][(w + 1) % n] += q(1, 2);
    }
    p.init = Row(n, Rational(1, n));
    CHECK(is_irreducible(p));
    CHECK(is_recurrent(p));
  }
}

TEST_CASE("reachability") {
  Process p = make({{q(1, 2), q(1, 2), q(0)}, {q(0), q(0), q(1)}, {q(0), q(0), q(1)}}, {0, 1, 2});
  auto r = reachability(p);
  CHECK(r[0] == 0b111);
  CHECK(r[1] == 0b100);
  CHECK(r[2] == 0b100);
  CHECK(recurrent_states(p) == 0b100);
}
