#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "taxeval/lasso.hpp"
#include "taxeval/rng.hpp"

namespace {

struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Problem make_problem(int n, int p) {
    taxeval::RngStream rng(2);
    Problem prob;
    prob.X.resize(n, p);
    prob.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) prob.X(i, j) = rng.normal();
        prob.y(i) = 0.6 * prob.X(i, 0) - 0.3 * prob.X(i, p / 2) + 0.2 * rng.normal();
    }
    return prob;
}

void BM_lasso_fit(benchmark::State& state) {
    const Problem prob = make_problem(static_cast<int>(state.range(0)),
                                      static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(taxeval::fit_lasso(prob.X, prob.y, 0.01));
    }
}

} // namespace

BENCHMARK(BM_lasso_fit)->Args({500, 10})->Args({2000, 20})->Args({2000, 40});
