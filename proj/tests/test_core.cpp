#include <catch2/catch_amalgamated.hpp>

#include "wmlab/core/rng.hpp"
#include "wmlab/core/sha256.hpp"
#include "wmlab/core/tensor.hpp"

using namespace wmlab;

TEST_CASE("tensor shape and indexing") {
  Tensor<float> t(2, 3, 4, 5);
  REQUIRE(t.size() == 2u * 3 * 4 * 5);
  t.at(1, 2, 3, 4) = 7.f;
  CHECK(t[t.size() - 1] == 7.f);
  CHECK(t.shape_str() == "(2,3,4,5)");
  CHECK_THROWS(Tensor<float>(0, 1, 1, 1));
  CHECK(Tensor<float>::scalar(3.f).item() == 3.f);
  CHECK_THROWS(t.item());
}

TEST_CASE("rng determinism and independence") {
  RandomSource a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  bool differs = false;
  RandomSource a2(42);
  for (int i = 0; i < 10; ++i) differs |= a2.next_u64() != c.next_u64();
  CHECK(differs);

  // child streams are keyed off the base seed, not the draw position
  RandomSource p(7);
  p.next_u64();
  p.next_u64();
  RandomSource q(7);
  CHECK(p.child(3).next_u64() == q.child(3).next_u64());
  CHECK(p.child(3).next_u64() != p.child(4).next_u64());
}

TEST_CASE("rng uniform_int is unbiased enough") {
  RandomSource rng(123);
  const int n = 10, draws = 100000;
  std::vector<int> hist(n, 0);
  for (int i = 0; i < draws; ++i) ++hist[rng.uniform_int(n)];
  double chi2 = 0, expect = static_cast<double>(draws) / n;
  for (int k = 0; k < n; ++k) chi2 += (hist[k] - expect) * (hist[k] - expect) / expect;
  CHECK(chi2 < 27.88);  // chi-square 9 dof, p=0.001
}

TEST_CASE("rng normal moments") {
  RandomSource rng(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    s += v;
    s2 += v * v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
