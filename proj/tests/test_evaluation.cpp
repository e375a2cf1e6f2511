#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dimx/errors.hpp"
#include "dimx/evaluation.hpp"
#include "testing.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

using namespace dimx;

namespace {

// Pearson correlation of the shared elements' positions, computed directly.
double pearson_of_positions(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (a[i] == b[j]) {
                ra.push_back(static_cast<double>(i));
                rb.push_back(static_cast<double>(j));
            }
    if (ra.size() <= 1) return 1.0;
    // Ranks among the shared elements only.
    auto rerank = [](std::vector<double> v) {
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (auto& x : v) x = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
        return v;
    };
    ra = rerank(ra);
    rb = rerank(rb);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("gaussian generator") {
    SUBCASE("deterministic per seed") {
        CHECK(gen_gaussian(50, 4, 9).values() == gen_gaussian(50, 4, 9).values());
        CHECK(gen_gaussian(50, 4, 9).values() != gen_gaussian(50, 4, 10).values());
    }
    SUBCASE("column variances follow diag(1..d)/d") {
        const Dataset g = gen_gaussian(10000, 10, 3);
        for (std::size_t j = 0; j < 10; ++j) {
            const auto col = g.values().col(static_cast<Eigen::Index>(j));
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
            const double expected = static_cast<double>(j + 1) / 10.0;
            CHECK(std::abs(var - expected) <= 0.1 * expected);
            CHECK(std::abs(mean) < 0.05);
        }
    }
    SUBCASE("minimal case") {
        const Dataset g = gen_gaussian(2, 2, 1);
        CHECK(g.rows() == 2);
        CHECK(g.cols() == 2);
        CHECK(g.ids()[0] != g.ids()[1]);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(gen_gaussian(1, 3, 0), PreconditionError);
        CHECK_THROWS_AS(gen_gaussian(3, 1, 0), PreconditionError);
    }
}

TEST_CASE("knn") {
    SUBCASE("collinear points, query at the end") {
        Matrix p(5, 2);
        p << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0;
        const auto nn = knn(p, 0, 2);
        REQUIRE(nn.size() == 2);
        CHECK(nn[0] == Neighbor{1, 1.0});
        CHECK(nn[1] == Neighbor{2, 2.0});
    }
    SUBCASE("two points") {
        Matrix p(2, 2);
        p << 0, 0, 3, 4;
        CHECK(knn(p, 1, 1) == std::vector<Neighbor>{{0, 5.0}});
    }
    SUBCASE("duplicates tie by index") {
        Matrix p(5, 2);
        p << 1, 1, 0, 0, 1, 1, 1, 1, 0, 0;
        const auto nn = knn(p, 1, 4);
        CHECK(nn[0].index == 4);
        CHECK(nn[1].index == 0);
        CHECK(nn[2].index == 2);
        CHECK(nn[3].index == 3);
    }
    SUBCASE("brute-force oracle") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Index n = 20 + 24 * trial;
            Matrix p(n, 2);
            for (Eigen::Index i = 0; i < n; ++i) p.row(i) << std::round(u(rng) * 20) / 20, std::round(u(rng) * 20) / 20;
            const std::size_t q = static_cast<std::size_t>(trial) % static_cast<std::size_t>(n);
            std::vector<std::pair<double, std::size_t>> all;
            for (Eigen::Index i = 0; i < n; ++i)
                if (static_cast<std::size_t>(i) != q)
                    all.emplace_back((p.row(i) - p.row(static_cast<Eigen::Index>(q))).norm(), static_cast<std::size_t>(i));
            std::sort(all.begin(), all.end());
            const auto nn = knn(p, q, 10);
            REQUIRE(nn.size() == 10);
            for (std::size_t k = 0; k < 10; ++k) {
                CHECK(nn[k].index == all[k].second);
                CHECK(nn[k].distance == all[k].first);
            }
        }
    }
    SUBCASE("k must be below n") {
        Matrix p(3, 2);
        p.setZero();
        CHECK_THROWS_AS(knn(p, 0, 3), PreconditionError);
    }
}

TEST_CASE("neighborhood correlation") {
    SUBCASE("identical ordered lists") {
        const auto s = neighborhood_correlation({1, 2, 3, 4}, {1, 2, 3, 4}, 4);
        CHECK(s.overlap == 4);
        CHECK(s.score == 1.0);
    }
    SUBCASE("disjoint lists") {
        const auto s = neighborhood_correlation({1, 2, 3}, {4, 5, 6}, 3);
        CHECK(s.overlap == 0);
        CHECK(s.score == 0.0);
    }
    SUBCASE("swapped leading pair") {
        const auto s = neighborhood_correlation({7, 8, 9}, {8, 7, 9}, 3);
        CHECK(s.overlap == 3);
        CHECK(s.rank_corr == 0.5);
        CHECK(s.score == 0.75);
    }
    SUBCASE("single shared element counts as perfectly ordered") {
        const auto s = neighborhood_correlation({1, 2, 3, 4}, {9, 8, 1, 7}, 4);
        CHECK(s.overlap == 1);
        CHECK(s.rank_corr == 1.0);
        CHECK(s.score == 0.25);
    }
    SUBCASE("reversed order") {
        const auto s = neighborhood_correlation({1, 2, 3, 4}, {4, 3, 2, 1}, 4);
        CHECK(s.rank_corr == doctest::Approx(-1.0));
        CHECK(s.score == doctest::Approx(0.0));
    }
    SUBCASE("random lists against a Pearson-of-ranks oracle, symmetry and relabeling") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::size_t> pool(25);
            std::iota(pool.begin(), pool.end(), 0);
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<std::size_t> a(pool.begin(), pool.begin() + 10);
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<std::size_t> b(pool.begin(), pool.begin() + 10);
            const auto s = neighborhood_correlation(a, b, 10);
            const auto t = neighborhood_correlation(b, a, 10);
            CHECK(s.rank_corr == doctest::Approx(pearson_of_positions(a, b)));
            CHECK(s.score == doctest::Approx(static_cast<double>(s.overlap) / 10.0 * (1 + s.rank_corr) / 2));
            CHECK(s.score == doctest::Approx(t.score));
            CHECK(s.score >= 0.0);
            CHECK(s.score <= 1.0);
            auto relabel = [](std::vector<std::size_t> v) {
                for (auto& x : v) x = 1000 - 3 * x;
                return v;
            };
            CHECK(neighborhood_correlation(relabel(a), relabel(b), 10).score == doctest::Approx(s.score));
        }
    }
    SUBCASE("neighbor overload uses indices") {
        const std::vector<Neighbor> a{{1, 0.1}, {2, 0.2}, {3, 0.3}};
        const std::vector<Neighbor> b{{2, 5.0}, {1, 6.0}, {3, 7.0}};
        CHECK(neighborhood_correlation(a, b, 3).score == 0.75);
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(neighborhood_correlation({1, 2}, {1, 2, 3}, 3), PreconditionError);
    }
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("small benchmark") {
    BenchConfig config;
    config.sample_counts = {60, 120};
    config.dimension_counts = {5};
    config.fixed_d = 6;
    config.fixed_n = 60;
    config.k = 5;
    config.repeats = 4;
    config.seed = 3;

    SUBCASE("zero perturbation is exact") {
        config.forward_fraction = 0.0;
        config.backward_fraction = 0.0;
        config.include_autoencoder = true;
        config.ae_config.epochs = 2;
        config.ae_config.hidden = {8};
        const auto rows = run_benchmark(config);
        CHECK(rows.size() == 3 * 3 * 2);
        for (const auto& r : rows) {
            CHECK(r.repeats == 4);
            CHECK(r.median_us >= 0.0);
            if (r.op == "recompute") CHECK(std::isnan(r.accuracy_mean));
            else CHECK(r.accuracy_mean == 1.0);
        }
    }
    SUBCASE("deterministic accuracies and CSV layout") {
        const auto a = run_benchmark(config), b = run_benchmark(config);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].op != "recompute") CHECK(a[i].accuracy_mean == b[i].accuracy_mean);
        std::ostringstream out;
        write_benchmark_csv(out, a);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "setting_axis,setting_value,model,op,median_us,accuracy_mean,accuracy_std,repeats,seed");
        std::size_t lines = 0;
        while (std::getline(in, line)) {
            ++lines;
            CHECK(std::count(line.begin(), line.end(), ',') == 8);
            if (line.find(",recompute,") != std::string::npos) CHECK(line.find(",,,") != std::string::npos);
        }
        CHECK(lines == a.size());
    }
    SUBCASE("autoencoder rows when enabled") {
        config.sample_counts = {60};
        config.dimension_counts = {};
        config.include_autoencoder = true;
        config.ae_config.epochs = 2;
        config.ae_config.hidden = {8};
        const auto rows = run_benchmark(config);
        CHECK(std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.model == "autoencoder"; }) == 3);
    }
    SUBCASE("invalid config") {
        config.k = 60;
        CHECK_THROWS_AS(run_benchmark(config), PreconditionError);
    }
}
