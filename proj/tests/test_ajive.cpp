#include "doctest.h"
#include "support.hpp"

#include "jive/ajive.hpp"
#include "jive/errors.hpp"
#include "jive/simulation.hpp"

#include <cmath>

using namespace jive;

namespace {

// Two noise-free blocks: one shared score pattern, one private pattern each.
std::vector<DataBlock> exact_blocks(Vector& shared) {
  const Index n = 24;
  const Matrix s = center_rows(testing::gaussian(3, n, 17));
  // Orthonormalize the three patterns so the shared one is recoverable exactly.
  const Eigen::HouseholderQR<Matrix> qr(s.transpose());
  const Matrix q = qr.householderQ() * Matrix::Identity(n, 3);
  shared = q.col(0);
  const Matrix a = testing::gaussian(10, 1, 1);
  const Matrix b = testing::gaussian(10, 1, 2);
  const Matrix c = testing::gaussian(8, 1, 3);
  const Matrix d = testing::gaussian(8, 1, 4);
  const Matrix block1 = 5.0 * a * q.col(0).transpose() + 3.0 * b * q.col(1).transpose();
  const Matrix block2 = 4.0 * c * q.col(0).transpose() + 2.0 * d * q.col(2).transpose();
  return {DataBlock::unlabeled("one", block1), DataBlock::unlabeled("two", block2)};
}

double score_angle(const Vector& a, const Vector& b) { return vector_angle(a, b); }

}  // namespace

TEST_CASE("noise-free shared structure is recovered exactly") {
  Vector shared;
  const auto blocks = exact_blocks(shared);
  const AjiveDecomposition dec = ajive_decompose(blocks, {{2, 2}, 1, false});

  CHECK(dec.joint_rank == 1);
  CHECK(score_angle(dec.cns.row(0).transpose(), shared) < 1.0);
  REQUIRE(dec.blocks.size() == 2);
  CHECK(dec.blocks[0].individual_rank == 1);
  CHECK(dec.blocks[1].individual_rank == 1);
  // The leading stacked singular value is sqrt(2) for a perfectly shared direction.
  CHECK(dec.stacked_singular_values(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  for (const auto& b : dec.blocks) {
    CHECK(b.bss.rows() == 1);
  }
  CHECK((dec.blocks[0].joint + dec.blocks[0].individual - blocks[0].matrix()).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("decomposition invariants on noisy data") {
  ToyConfig cfg;
  cfg.seed = 21;
  const ToyData toy = simulate_toy(cfg);
  const AjiveDecomposition dec = ajive_decompose(toy.blocks, {{3, 4}, 1, false});
  const Matrix& cns = dec.cns;

  CHECK((cns * cns.transpose() - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff() < 1e-8);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& b = dec.blocks[m];
    const Matrix& d = toy.blocks[m].matrix();
    CHECK((b.joint - b.joint * cns.transpose() * cns).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((b.individual * cns.transpose()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((b.bss * b.bss.transpose() - Matrix::Identity(b.bss.rows(), b.bss.rows())).cwiseAbs().maxCoeff() <
          1e-8);
    CHECK(((d - b.joint - b.individual) * b.bss.transpose()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((b.bss * cns.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(dec.blocks[0].individual_rank == 2);
  CHECK(dec.blocks[1].individual_rank == 3);
}

TEST_CASE("individual rank arithmetic") {
  const std::vector<Index> ranks = {77, 70, 3};
  CHECK(individual_ranks(ranks, 3) == std::vector<Index>{74, 67, 0});
  CHECK_THROWS_AS(individual_ranks(ranks, 4), InputError);
  CHECK_THROWS_AS(individual_ranks(ranks, 0), InputError);

  // The same arithmetic through a full decomposition, with an indicator block
  // of four classes as the third block.
  const Index n = 100;
  std::vector<std::string> labels;
  for (Index j = 0; j < n; ++j) labels.push_back(std::string(1, static_cast<char>('A' + j % 4)));
  const std::vector<std::string> classes = {"A", "B", "C", "D"};
  const std::vector<DataBlock> blocks = {
      DataBlock::unlabeled("cnv", testing::gaussian(90, n, 1)),
      DataBlock::unlabeled("ge", testing::gaussian(80, n, 2)),
      build_indicator_block(labels, classes, "subtype", DataBlock::unlabeled("x", Matrix::Zero(1, n)).case_ids())};
  const AjiveDecomposition dec = ajive_decompose(blocks, {{77, 70, 3}, 3, false});
  CHECK(dec.joint_rank == 3);
  CHECK(dec.blocks[0].individual_rank == 74);
  CHECK(dec.blocks[1].individual_rank == 67);
  CHECK(dec.blocks[2].individual_rank == 0);
  CHECK(dec.blocks[2].bss.rows() == 0);
  CHECK(dec.blocks[2].individual.cwiseAbs().maxCoeff() == 0.0);
  CHECK(dec.blocks[2].centered_on_entry);
}

TEST_CASE("automatic joint rank") {
  CHECK(auto_joint_threshold(2) == doctest::Approx(1.5));
  CHECK(auto_joint_threshold(3) == doctest::Approx(2.0));
  Vector sv(4);
  sv << 1.41, 1.3, 1.1, 0.4;  // squares 1.988, 1.69, 1.21, 0.16
  CHECK(auto_joint_rank(sv, 2) == 2);
  CHECK(auto_joint_rank(sv, 3) == 0);

  Vector shared;
  const auto blocks = exact_blocks(shared);
  const AjiveDecomposition dec = ajive_decompose(blocks, {{2, 2}, std::nullopt, false});
  CHECK(dec.joint_rank == 1);
}

TEST_CASE("input validation") {
  Vector shared;
  auto blocks = exact_blocks(shared);
  CHECK_THROWS_AS(ajive_decompose(std::span<const DataBlock>(blocks.data(), 1), {{2}, 1, false}),
                  InputError);
  CHECK_THROWS_AS(ajive_decompose(blocks, {{2}, 1, false}), InputError);
  CHECK_THROWS_AS(ajive_decompose(blocks, {{2, 2}, 3, false}), InputError);
  CHECK_THROWS_AS(ajive_decompose(blocks, {{0, 2}, 1, false}), InputError);
  CHECK_THROWS_AS(ajive_decompose(blocks, {{2, 9}, 1, false}), InputError);

  std::vector<std::string> other_ids;
  for (Index j = 0; j < blocks[1].cases(); ++j) other_ids.push_back("x" + std::to_string(j));
  const DataBlock renamed("two", blocks[1].matrix(), blocks[1].feature_names(), other_ids);
  const std::vector<DataBlock> mismatched = {blocks[0], renamed};
  CHECK_THROWS_AS(ajive_decompose(mismatched, {{2, 2}, 1, false}), InputError);

  CHECK_THROWS_AS(DataBlock("bad", Matrix::Ones(2, 3), {"a"}, {"1", "2", "3"}), InputError);
  CHECK_THROWS_AS(DataBlock("bad", Matrix::Ones(2, 3), {"a", "b"}, {"1", "2"}), InputError);
}

TEST_CASE("blocks are centered on entry") {
  Vector shared;
  auto blocks = exact_blocks(shared);
  Matrix shifted = blocks[0].matrix();
  shifted.array().colwise() += Eigen::ArrayXd::LinSpaced(shifted.rows(), 1.0, 5.0);
  const std::vector<DataBlock> in = {blocks[0].with_matrix(shifted, false), blocks[1]};
  const AjiveDecomposition dec = ajive_decompose(in, {{2, 2}, 1, false});
  CHECK(dec.blocks[0].centered_on_entry);
  CHECK_FALSE(dec.blocks[1].centered_on_entry);
  CHECK(score_angle(dec.cns.row(0).transpose(), shared) < 1.0);
}

TEST_CASE("indicator block") {
  const std::vector<std::string> order = {"A", "B", "C", "D"};

  SUBCASE("the displayed subtype matrix") {
    const std::vector<std::string> labels = {"B", "C", "A", "B", "A", "C", "D"};
    const DataBlock b = build_indicator_block(labels, order);
    Matrix expected(4, 7);
    expected << 0, 0, 1, 0, 1, 0, 0,
                1, 0, 0, 1, 0, 0, 0,
                0, 1, 0, 0, 0, 1, 0,
                0, 0, 0, 0, 0, 0, 1;
    CHECK(b.matrix() == expected);
    CHECK_FALSE(b.centered());
    CHECK(b.feature_names() == order);
  }
  SUBCASE("two classes give the identity") {
    const std::vector<std::string> labels = {"A", "B"};
    const std::vector<std::string> two = {"A", "B"};
    CHECK(build_indicator_block(labels, two).matrix() == Matrix::Identity(2, 2));
  }
  SUBCASE("rejections") {
    const std::vector<std::string> same = {"A", "A", "A"};
    CHECK_THROWS_AS(build_indicator_block(same, order), InputError);
    const std::vector<std::string> unknown = {"A", "E"};
    CHECK_THROWS_AS(build_indicator_block(unknown, order), InputError);
    const std::vector<std::string> one = {"A"};
    const std::vector<std::string> labels = {"A", "A"};
    CHECK_THROWS_AS(build_indicator_block(labels, one), InputError);
  }
}

TEST_CASE("score selection") {
  ToyConfig cfg;
  cfg.seed = 4;
  const ToyData toy = simulate_toy(cfg);
  const AjiveDecomposition dec = ajive_decompose(toy.blocks, {{2, 2}, 1, false});

  const Vector joint = select_scores(dec, Space::joint, std::nullopt, 0);
  CHECK(joint.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((joint - dec.cns.row(0).transpose()).norm() == 0.0);
  CHECK(std::abs(joint.dot(toy.truth.joint_scores)) > 0.9);

  const Vector indiv = select_scores(dec, Space::individual, 0, 0);
  CHECK((indiv - dec.blocks[0].bss.row(0).transpose()).norm() == 0.0);

  CHECK(select_score_matrix(dec, Space::joint, std::nullopt, std::nullopt).cols() == 1);
  CHECK_THROWS_AS(select_scores(dec, Space::joint, std::nullopt, 1), InputError);
  CHECK_THROWS_AS(select_scores(dec, Space::individual, 2, 0), InputError);
  CHECK_THROWS_AS(select_scores(dec, Space::individual, std::nullopt, 0), InputError);
}

TEST_CASE("toy joint loading angle") {
  ToyConfig cfg;
  cfg.seed = 2;
  const ToyData toy = simulate_toy(cfg);
  const AjiveDecomposition dec = ajive_decompose(toy.blocks, {{2, 2}, 1, false});
  const Vector v = dec.cns.row(0).transpose();
  for (std::size_t m = 0; m < 2; ++m) {
    const double angle = vector_angle(toy.blocks[m].matrix() * v, toy.truth.joint_loadings[m]);
    CHECK(angle > 5.0);
    CHECK(angle < 30.0);
  }
}

TEST_CASE("case permutation equivariance") {
  Matrix a(2, 3);
  Matrix b(2, 3);
  a << 1, 2, 6, 4, 0, -1;
  b << 3, 1, 0, -2, 5, 1;
  const std::vector<DataBlock> blocks = {DataBlock::unlabeled("a", a), DataBlock::unlabeled("b", b)};
  const std::vector<int> perm = {2, 0, 1};
  Matrix pa(2, 3);
  Matrix pb(2, 3);
  for (int j = 0; j < 3; ++j) {
    pa.col(j) = a.col(perm[j]);
    pb.col(j) = b.col(perm[j]);
  }
  const std::vector<DataBlock> permuted = {DataBlock::unlabeled("a", pa), DataBlock::unlabeled("b", pb)};
  const AjiveDecomposition d1 = ajive_decompose(blocks, {{1, 1}, 1, false});
  const AjiveDecomposition d2 = ajive_decompose(permuted, {{1, 1}, 1, false});
  Vector expected(3);
  for (int j = 0; j < 3; ++j) expected(j) = d1.cns(0, perm[j]);
  const Vector got = d2.cns.row(0).transpose();
  CHECK(std::min((got - expected).norm(), (got + expected).norm()) < 1e-10);
}

TEST_CASE("scaling one block keeps the toy joint direction") {
  ToyConfig cfg;
  cfg.seed = 6;
  const ToyData toy = simulate_toy(cfg);
  const AjiveDecomposition base = ajive_decompose(toy.blocks, {{2, 2}, 1, false});
  for (double c : {0.5, 0.8, 1.5, 2.0}) {
    const std::vector<DataBlock> scaled = {toy.blocks[0].with_matrix(c * toy.blocks[0].matrix(), true),
                                           toy.blocks[1]};
    const AjiveDecomposition dec = ajive_decompose(scaled, {{2, 2}, 1, false});
    CHECK(vector_angle(dec.cns.row(0).transpose(), base.cns.row(0).transpose()) < 1.0);
  }
}

TEST_CASE("block normalization records the scale") {
  Vector shared;
  const auto blocks = exact_blocks(shared);
  const AjiveDecomposition dec = ajive_decompose(blocks, {{2, 2}, 1, true});
  CHECK(dec.blocks[0].scale == doctest::Approx(1.0 / blocks[0].matrix().norm()));
  CHECK(score_angle(dec.cns.row(0).transpose(), shared) < 1.0);
}
