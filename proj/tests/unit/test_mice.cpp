#include <doctest.h>

#include <cmath>
#include <limits>

#include "taxeval/errors.hpp"
#include "taxeval/mice.hpp"
#include "taxeval/rng.hpp"

using namespace taxeval;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TEST_SUITE("mice") {

TEST_CASE("complete matrix is a fixed point") {
    RngStream rng(1);
    Eigen::MatrixXd m(30, 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = rng.normal();
    }
    const Eigen::MatrixXd before = m;
    const Eigen::MatrixXd after = mice_impute(m, {false, false, false}, 5, 0);
    CHECK((after - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a missing cell in a perfectly linear column hits the regression line") {
    // column 1 = 3 * column 0 - 2, one hole at row 7
    Eigen::MatrixXd m(20, 2);
    RngStream rng(2);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = rng.uniform(0.0, 10.0);
        m(i, 1) = 3.0 * m(i, 0) - 2.0;
    }
    const double expected = 3.0 * m(7, 0) - 2.0; // closed-form regression oracle
    m(7, 1) = kNaN;
    const Eigen::MatrixXd out = mice_impute(m, {false, false}, 5, 0);
    CHECK(out(7, 1) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("an entirely missing column is rejected") {
    Eigen::MatrixXd m(10, 2);
    m.col(0).setConstant(1.0);
    m.col(1).setConstant(kNaN);
    CHECK_THROWS_AS(mice_impute(m, {false, false}, 5, 0), AllMissingColumn);
}

TEST_CASE("observed entries are never altered") {
    RngStream rng(3);
    Eigen::MatrixXd m(60, 4);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> observed;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (rng.uniform01() < 0.25 && i > 0) {
                m(i, c) = kNaN;
            } else {
                m(i, c) = rng.normal();
                observed.emplace_back(i, c);
            }
        }
    }
    const Eigen::MatrixXd before = m;
    const Eigen::MatrixXd after = mice_impute(m, {false, false, false, false}, 5, 0);
    for (const auto& [i, c] : observed) CHECK(after(i, c) == before(i, c));
    CHECK_FALSE(after.hasNaN());
}

TEST_CASE("imputation is deterministic") {
    RngStream rng(4);
    Eigen::MatrixXd m(40, 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(i, c) = rng.uniform01() < 0.2 && i > 2 ? kNaN : rng.normal();
        }
    }
    const Eigen::MatrixXd a = mice_impute(m, {false, false, false}, 5, 0);
    const Eigen::MatrixXd b = mice_impute(m, {false, false, false}, 5, 99);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0); // seed reserved; linear models are exact
}

TEST_CASE("indicator columns impute to the training mode") {
    Eigen::MatrixXd m(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
        m(i, 0) = static_cast<double>(i);
        m(i, 1) = i < 7 ? 1.0 : 0.0;
    }
    m(9, 1) = kNaN;
    const Eigen::MatrixXd out = mice_impute(m, {false, true}, 3, 0);
    CHECK(out(9, 1) == 1.0); // seven observed ones vs two zeros
}

TEST_CASE("fitted model replays on new rows") {
    Eigen::MatrixXd train(50, 2);
    RngStream rng(5);
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        train(i, 0) = rng.uniform(0.0, 5.0);
        train(i, 1) = -2.0 * train(i, 0) + 1.0;
    }
    train(4, 1) = kNaN; // give the fitter a reason to build column models
    const MiceModel model = mice_fit(train, {false, false}, 5, 0);

    Eigen::MatrixXd fresh(3, 2);
    fresh << 1.0, kNaN, 2.0, kNaN, 4.0, kNaN;
    mice_apply(model, fresh);
    CHECK(fresh(0, 1) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(fresh(1, 1) == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(fresh(2, 1) == doctest::Approx(-7.0).epsilon(1e-6));
}

} // TEST_SUITE
