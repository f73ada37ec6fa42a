#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emoxgen/gradcheck.hpp"
#include "emoxgen/losses.hpp"
#include "emoxgen/rng.hpp"

using namespace emoxgen;
using num::Tensor;

TEST_CASE("binary nll hand values") {
    CHECK(loss::nll_binary(Tensor<double>::from({1}, {1.0}), {1}).value.item() ==
          doctest::Approx(0.0).epsilon(1e-6));
    CHECK(loss::nll_binary(Tensor<double>::from({1}, {0.5}), {1}).value.item() ==
          doctest::Approx(0.6931).epsilon(1e-4));
    // Batch sums: -(ln 0.9 + ln 0.8).
    auto batch = loss::nll_binary(Tensor<double>::from({2, 1}, {0.9, 0.2}), {1, 0});
    CHECK(batch.value.item() == doctest::Approx(0.3285).epsilon(1e-3));
    CHECK(batch.n_terms == 2);
    // Optional normalization averages instead.
    auto normed = loss::nll_binary(Tensor<double>::from({2, 1}, {0.9, 0.2}), {1, 0}, true);
    CHECK(normed.value.item() == doctest::Approx(0.3285 / 2).epsilon(1e-3));
}

TEST_CASE("categorical nll picks the target class") {
    auto probs = Tensor<double>::from({2, 3}, {0.7, 0.2, 0.1, 0.1, 0.1, 0.8});
    auto l = loss::nll_categorical(probs, {0, 2});
    CHECK(l.value.item() == doctest::Approx(-std::log(0.7) - std::log(0.8)).epsilon(1e-9));
    CHECK_THROWS_AS(loss::nll_categorical(probs, {0, 3}), ContractError);
    CHECK_THROWS_AS(loss::nll_categorical(probs, {0}), ContractError);
}

TEST_CASE("bce hand values") {
    auto single = loss::bce_multilabel(Tensor<double>::from({1, 1}, {0.5}),
                                       {std::vector<double>{1.0}});
    CHECK(single.value.item() == doctest::Approx(0.6931).epsilon(1e-4));

    auto l = loss::bce_multilabel(Tensor<double>::from({2, 2}, {0.9, 0.1, 0.2, 0.8}),
                                  {std::vector<double>{1, 0}, std::vector<double>{0, 1}});
    CHECK(l.value.item() == doctest::Approx(0.1643).epsilon(1e-3));
    CHECK(l.n_terms == 4);

    auto perfect = loss::bce_multilabel(Tensor<double>::from({1, 2}, {1.0, 0.0}),
                                        {std::vector<double>{1, 0}});
    CHECK(perfect.value.item() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("losses are non-negative and positive off the optimum") {
    num::Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double p = 0.05 + 0.9 * rng.uniform();
        auto nll = loss::nll_binary(Tensor<double>::scalar(p), {1});
        CHECK(nll.value.item() >= 0.0);
        if (p < 0.99) CHECK(nll.value.item() > 1e-4);
    }
}

TEST_CASE("a single binary term is identical under nll and bce") {
    for (double p : {1e-9, 0.001, 0.25, 0.5, 0.875, 0.999, 1.0}) {
        for (int y : {0, 1}) {
            auto nll = loss::nll_binary(Tensor<double>::from({1, 1}, {p}), {y});
            auto bce = loss::bce_multilabel(Tensor<double>::from({1, 1}, {p}),
                                            {std::vector<double>{static_cast<double>(y)}});
            CHECK(nll.value.item() == bce.value.item());  // exact
        }
    }
}

TEST_CASE("bce is permutation-invariant across examples and classes") {
    auto base = loss::bce_multilabel(
        Tensor<double>::from({2, 3}, {0.9, 0.1, 0.4, 0.2, 0.8, 0.6}),
        {std::vector<double>{1, 0, 1}, std::vector<double>{0, 1, 0}});
    auto rows_swapped = loss::bce_multilabel(
        Tensor<double>::from({2, 3}, {0.2, 0.8, 0.6, 0.9, 0.1, 0.4}),
        {std::vector<double>{0, 1, 0}, std::vector<double>{1, 0, 1}});
    auto cols_swapped = loss::bce_multilabel(
        Tensor<double>::from({2, 3}, {0.1, 0.9, 0.4, 0.8, 0.2, 0.6}),
        {std::vector<double>{0, 1, 1}, std::vector<double>{1, 0, 0}});
    CHECK(base.value.item() == doctest::Approx(rows_swapped.value.item()).epsilon(1e-15));
    CHECK(base.value.item() == doctest::Approx(cols_swapped.value.item()).epsilon(1e-15));
}

TEST_CASE("nll gradient at the logit is sigmoid(z) - y") {
    num::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const double zv = 4.0 * (rng.uniform() - 0.5);
        const int y = rng.bernoulli(0.5) ? 1 : 0;
        auto z = Tensor<double>::param({1, 1}, {zv});
        auto probs = num::sigmoid(z);
        num::backward(loss::nll_binary(probs, {y}).value);
        const double expected = 1.0 / (1.0 + std::exp(-zv)) - y;
        CHECK(z.grad()[0] == doctest::Approx(expected).epsilon(1e-9));
    }

    // Same derivative against finite differences.
    auto z = Tensor<double>::param({2, 1}, {0.3, -1.1});
    std::vector<Tensor<double>> params{z};
    auto f = [&]() { return loss::nll_binary(num::sigmoid(z), {1, 0}).value; };
    CHECK(num::grad_check(f, params, 1e-5) <= 1e-6);
}

TEST_CASE("bce gradient through a logit matrix matches finite differences") {
    num::Rng rng(5);
    std::vector<double> init(6);
    for (auto& v : init) v = 2.0 * (rng.uniform() - 0.5);
    auto z = Tensor<double>::param({2, 3}, init);
    std::vector<Tensor<double>> params{z};
    std::vector<std::vector<double>> targets{{1, 0, 1}, {0, 1, 0}};
    auto f = [&]() { return loss::bce_multilabel(num::sigmoid(z), targets).value; };
    CHECK(num::grad_check(f, params, 1e-5) <= 1e-6);
}

TEST_CASE("batch size mismatches are contract errors") {
    CHECK_THROWS_AS(loss::nll_binary(Tensor<double>::from({2, 1}, {0.5, 0.5}), {1}),
                    ContractError);
    CHECK_THROWS_AS(loss::bce_multilabel(Tensor<double>::from({1, 2}, {0.5, 0.5}),
                                         {std::vector<double>{1.0}}),
                    ContractError);
}
