#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "ssrc/memory.hpp"

using namespace ssrc;
using namespace ssrc::memory;

namespace {

MemoryBanks banks_from(const Matrix& rows, double tau = 0.05, double alpha = 0.1) {
    MemoryBanks b;
    b.centroid = rows;
    b.hard = rows;
    b.tau = tau;
    b.alpha = alpha;
    return b;
}

MemoryBanks random_banks(Rng& rng, std::size_t n, std::size_t d, double tau) {
    MemoryBanks b = banks_from(oracle::unit_rows(rng, n, d), tau);
    b.hard = oracle::unit_rows(rng, n, d);
    return b;
}

// Class-smoothing loss straight from its definition, without stabilization.
double csc_by_definition(const Vec& v, int label, const std::vector<int>& P, const Matrix& bank, double tau, double lambda) {
    const std::size_t n = bank.rows();
    const double K = static_cast<double>(P.size());
    std::vector<double> e(n);
    for (std::size_t k = 0; k < n; ++k) e[k] = std::exp(dot(v, bank.row(k)) / tau);
    double negatives = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (std::find(P.begin(), P.end(), static_cast<int>(k + 1)) == P.end()) negatives += e[k];
    double value = 0.0;
    for (int j : P) {
        const double s = j == label ? 1.0 - lambda + lambda / K : lambda / K;
        const double ej = e[static_cast<std::size_t>(j - 1)];
        value -= s * std::log(ej / (ej + negatives));
    }
    return value;
}

}  // namespace

TEST_SUITE("memory") {
    TEST_CASE("init from cluster means") {
        Matrix f(3, 2);
        f(0, 0) = 1.0;
        f(1, 1) = 1.0;
        f(2, 0) = 0.6;
        f(2, 1) = 0.8;
        const auto b = init_memory(f, std::vector<int>{1, 1, 2}, 2, 0.05, 0.1);
        CHECK(b.centroid(0, 0) == doctest::Approx(std::sqrt(2.0) / 2));
        CHECK(b.centroid(0, 1) == doctest::Approx(std::sqrt(2.0) / 2));
        CHECK(b.centroid.row_vec(1) == Vec{0.6, 0.8});
        CHECK(b.centroid == b.hard);
        CHECK(b.num_classes() == 2);

        const auto skip = init_memory(f, std::vector<int>{1, kOutlier, 2}, 2, 0.05, 0.1);
        CHECK(skip.centroid.row_vec(0) == Vec{1.0, 0.0});
        CHECK_THROWS(init_memory(f, std::vector<int>{1, 2}, 2, 0.05, 0.1));
    }

    TEST_CASE("infonce special values") {
        Matrix one(1, 3);
        one(0, 2) = 1.0;
        const auto single = infonce_loss(Vec{0, 0.6, 0.8}, 1, banks_from(one), Bank::Centroid);
        CHECK(single.value == doctest::Approx(0.0).epsilon(1e-15));
        for (double g : single.grad) CHECK(std::abs(g) < 1e-12);

        Matrix two(2, 2);
        two(0, 0) = 1.0;
        two(1, 1) = 1.0;
        const auto out = infonce_loss(Vec{1, 0}, 1, banks_from(two, 0.05), Bank::Centroid);
        const double expected = -std::log(std::exp(20.0) / (std::exp(20.0) + 1.0));
        CHECK(out.value == doctest::Approx(expected).epsilon(1e-6));
        CHECK(out.value == doctest::Approx(2.06e-9).epsilon(1e-2));

        CHECK_THROWS_AS(infonce_loss(Vec{1, 0}, 3, banks_from(two), Bank::Centroid), std::out_of_range);
        CHECK_THROWS(infonce_loss(Vec{1, 0, 0}, 1, banks_from(two), Bank::Centroid));
    }

    TEST_CASE("softmax probabilities sum to one") {
        // With the identity as bank, tau * grad = p - onehot.
        Rng rng = derive_rng(7, 1);
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = uniform_index(rng, 2, 12);
            Matrix eye(n, n);
            for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
            const double tau = oracle::uniform(rng, 0.05, 1.0);
            const auto out = infonce_loss(oracle::unit_vec(rng, n), 1, banks_from(eye, tau), Bank::Centroid);
            double sum = 0.0;
            for (double g : out.grad) sum += g * tau;
            CHECK(std::abs(sum) <= 1e-12);
        }
    }

    TEST_CASE("csc weights and definition") {
        Rng rng = derive_rng(7, 2);
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = uniform_index(rng, 2, 8), d = uniform_index(rng, 2, 6);
            const double tau = oracle::uniform(rng, 0.2, 1.0), lambda = oracle::uniform(rng, 0.0, 1.0);
            const auto b = random_banks(rng, n, d, tau);
            const int label = static_cast<int>(uniform_index(rng, 1, n));
            std::vector<int> P{label};
            for (int c = 1; c <= static_cast<int>(n); ++c)
                if (c != label && uniform_index(rng, 0, 1)) P.push_back(c);
            std::sort(P.begin(), P.end());
            const Vec v = oracle::unit_vec(rng, d);
            CHECK(csc_loss(v, label, P, b, Bank::Hard, lambda).value ==
                  doctest::Approx(csc_by_definition(v, label, P, b.hard, tau, lambda)).epsilon(1e-10));
        }

        // lambda = 0.1, K = 2: the label term carries 0.95, the other 0.05.
        Matrix rows(3, 2);
        rows(0, 0) = 1;
        rows(1, 1) = 1;
        rows(2, 0) = -1;
        const auto b = banks_from(rows, 0.5);
        const Vec v{0.6, 0.8};
        auto term = [&](int j) {
            const double ej = std::exp(dot(v, rows.row(static_cast<std::size_t>(j - 1))) / 0.5);
            const double neg = std::exp(dot(v, rows.row(2)) / 0.5);
            return -std::log(ej / (ej + neg));
        };
        CHECK(csc_loss(v, 1, std::vector<int>{1, 2}, b, Bank::Centroid, 0.1).value ==
              doctest::Approx(0.95 * term(1) + 0.05 * term(2)).epsilon(1e-12));
    }

    TEST_CASE("csc with lambda zero is infonce over the label and the negatives") {
        Matrix rows(4, 3);
        rows(0, 0) = 1;
        rows(1, 1) = 1;
        rows(2, 2) = 1;
        rows(3, 0) = -1;
        const auto b = banks_from(rows, 0.3);
        const Vec v = normalized(Vec{0.2, 0.5, 0.4});
        Matrix reduced(3, 3);  // classes {1} plus the complement {3, 4}
        reduced.set_row(0, rows.row(0));
        reduced.set_row(1, rows.row(2));
        reduced.set_row(2, rows.row(3));
        const auto a = csc_loss(v, 1, std::vector<int>{1, 2}, b, Bank::Centroid, 0.0);
        const auto ref = infonce_loss(v, 1, banks_from(reduced, 0.3), Bank::Centroid);
        CHECK(a.value == doctest::Approx(ref.value).epsilon(1e-12));
    }

    TEST_CASE("csc with a singleton positive set is infonce") {
        Rng rng = derive_rng(7, 3);
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = uniform_index(rng, 1, 10), d = uniform_index(rng, 2, 8);
            const auto b = random_banks(rng, n, d, 0.05);
            const int label = static_cast<int>(uniform_index(rng, 1, n));
            const Vec v = oracle::unit_vec(rng, d);
            const auto a = csc_loss(v, label, std::vector<int>{label}, b, Bank::Centroid, 0.1);
            const auto r = infonce_loss(v, label, b, Bank::Centroid);
            CHECK(a.value == r.value);
            CHECK(a.grad == r.grad);
        }
    }

    TEST_CASE("csc rejects a label outside its positive set") {
        Rng rng = derive_rng(7, 4);
        const auto b = random_banks(rng, 3, 2, 0.05);
        CHECK_THROWS(csc_loss(Vec{1, 0}, 1, std::vector<int>{2, 3}, b, Bank::Centroid, 0.1));
    }

    TEST_CASE("merged infonce with a singleton set is infonce") {
        Rng rng = derive_rng(7, 5);
        const auto b = random_banks(rng, 5, 4, 0.1);
        const Vec v = oracle::unit_vec(rng, 4);
        CHECK(merged_infonce_loss(v, std::vector<int>{3}, b, Bank::Hard).value ==
              doctest::Approx(infonce_loss(v, 3, b, Bank::Hard).value).epsilon(1e-12));
    }

    TEST_CASE("loss gradients match finite differences") {
        Rng rng = derive_rng(7, 6);
        for (int t = 0; t < 60; ++t) {
            const std::size_t n = uniform_index(rng, 1, 8), d = uniform_index(rng, 2, 8);
            const double tau = oracle::uniform(rng, 0.05, 1.0), lambda = oracle::uniform(rng, 0.0, 1.0);
            const auto b = random_banks(rng, n, d, tau);
            const int label = static_cast<int>(uniform_index(rng, 1, n));
            std::vector<int> P{label};
            for (int c = 1; c <= static_cast<int>(n); ++c)
                if (c != label && uniform_index(rng, 0, 1)) P.push_back(c);
            std::sort(P.begin(), P.end());
            const Vec v = oracle::unit_vec(rng, d);
            TrainConfig cfg;
            cfg.lambda = lambda;

            auto check = [&](auto f, const Vec& analytic) {
                CHECK(oracle::relative_error(analytic, oracle::numeric_gradient(f, v)) <= 1e-5);
            };
            check([&](const Vec& x) { return infonce_loss(x, label, b, Bank::Centroid).value; },
                  infonce_loss(v, label, b, Bank::Centroid).grad);
            check([&](const Vec& x) { return csc_loss(x, label, P, b, Bank::Hard, lambda).value; },
                  csc_loss(v, label, P, b, Bank::Hard, lambda).grad);
            check([&](const Vec& x) { return merged_infonce_loss(x, P, b, Bank::Centroid).value; },
                  merged_infonce_loss(v, P, b, Bank::Centroid).grad);
            check([&](const Vec& x) { return combined_loss(x, label, P, b, cfg).value; },
                  combined_loss(v, label, P, b, cfg).grad);
        }
    }

    TEST_CASE("combined loss is linear in the weights") {
        Rng rng = derive_rng(7, 7);
        const auto b = random_banks(rng, 4, 3, 0.1);
        const Vec v = oracle::unit_vec(rng, 3);
        const std::vector<int> P{1, 3};
        TrainConfig hard_only, centroid_only, both;
        hard_only.gamma1 = 1.0;
        hard_only.gamma2 = 0.0;
        centroid_only.gamma1 = 0.0;
        centroid_only.gamma2 = 1.0;
        const double h = combined_loss(v, 1, P, b, hard_only).value;
        const double c = combined_loss(v, 1, P, b, centroid_only).value;
        CHECK(c == doctest::Approx(csc_loss(v, 1, P, b, Bank::Centroid, 0.1).value).epsilon(1e-14));
        CHECK(combined_loss(v, 1, P, b, both).value == doctest::Approx(0.5 * h + 0.25 * c).epsilon(1e-14));
        CHECK(combined_loss(v, 1, P, b, both, LossKind::InfoNCE).value ==
              doctest::Approx(0.5 * infonce_loss(v, 1, b, Bank::Hard).value + 0.25 * infonce_loss(v, 1, b, Bank::Centroid).value)
                  .epsilon(1e-14));
    }

    TEST_CASE("momentum update") {
        Matrix r(1, 2);
        r(0, 0) = 1.0;
        auto b = banks_from(r, 0.05, 0.1);
        const std::vector<Sample> batch{{{0.0, 1.0}, 1}};
        update_memory(b, batch);
        CHECK(b.centroid(0, 0) == doctest::Approx(0.1 / std::sqrt(0.82)).epsilon(1e-12));
        CHECK(std::abs(b.centroid(0, 0) - 0.1104) < 1e-4);
        CHECK(std::abs(b.centroid(0, 1) - 0.9939) < 1e-4);

        auto same = banks_from(r, 0.05, 0.1);
        update_memory(same, std::vector<Sample>{{{1.0, 0.0}, 1}});
        CHECK(same.centroid == r);

        Matrix two(2, 2);
        two(0, 0) = 1;
        two(1, 1) = 1;
        auto partial = banks_from(two, 0.05, 0.1);
        update_memory(partial, std::vector<Sample>{{{0.6, 0.8}, 1}});
        CHECK(partial.centroid.row_vec(1) == Vec{0.0, 1.0});

        // Two samples of one label average before the update.
        auto avg = banks_from(two, 0.05, 0.5);
        update_memory(avg, std::vector<Sample>{{{0.0, 1.0}, 1}, {{1.0, 0.0}, 1}});
        CHECK(avg.centroid(0, 0) == doctest::Approx(0.75 / std::sqrt(0.75 * 0.75 + 0.25 * 0.25)));

        CHECK_THROWS(update_memory(avg, std::vector<Sample>{}));
    }

    TEST_CASE("alpha one is a fixed point") {
        Rng rng = derive_rng(7, 8);
        auto b = random_banks(rng, 3, 4, 0.05);
        b.alpha = 1.0;
        const auto before = b;
        const std::vector<Sample> batch{{oracle::unit_vec(rng, 4), 1}, {oracle::unit_vec(rng, 4), 3}};
        update_memory(b, batch);
        update_hard_memory(b, batch);
        CHECK(b.centroid == before.centroid);
        CHECK(b.hard == before.hard);
    }

    TEST_CASE("hard memory uses the least similar sample") {
        Matrix r(1, 2);
        r(0, 0) = 1.0;
        const Vec close = normalized(Vec{0.9, std::sqrt(1 - 0.81)});
        const Vec far = normalized(Vec{0.2, std::sqrt(1 - 0.04)});

        auto b = banks_from(r, 0.05, 0.1);
        update_hard_memory(b, std::vector<Sample>{{close, 1}, {far, 1}});
        auto expect = banks_from(r, 0.05, 0.1);
        update_hard_memory(expect, std::vector<Sample>{{far, 1}});
        CHECK(b.hard == expect.hard);
        CHECK(b.centroid == r);

        // Equal similarity: the lower batch index wins.
        const Vec up{0.0, 1.0}, down{0.0, -1.0};
        auto tie = banks_from(r, 0.05, 0.1);
        update_hard_memory(tie, std::vector<Sample>{{up, 1}, {down, 1}});
        CHECK(tie.hard(0, 1) > 0.0);

        auto single = banks_from(r, 0.05, 0.1);
        update_hard_memory(single, std::vector<Sample>{{close, 1}});
        auto ref = banks_from(r, 0.05, 0.1);
        update_memory(ref, std::vector<Sample>{{close, 1}});
        CHECK(single.hard == ref.centroid);
    }
}
