#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <random>
#include <sstream>

#include "pignn/graph.hpp"
#include "pignn/oracle.hpp"
#include "pignn/qubo.hpp"

using namespace pignn;

namespace {

Graph triangle() { return Graph(3, {{0, 1}, {0, 2}, {1, 2}}); }

QuboInstance random_integer_instance(std::mt19937_64& rng, int n) {
    QuboInstance q;
    q.n = n;
    q.diag.resize(n);
    std::uniform_int_distribution<int> coeff(-5, 5);
    for (double& d : q.diag) d = coeff(rng);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (pick(rng) < 0.4) q.offdiag.push_back({i, j, static_cast<double>(coeff(rng))});
    return q;
}

// Quadratic form x^T Q x with the symmetric Q materialized explicitly; the
// independent route for the binary-agreement property.
double quadratic_form(const QuboInstance& q, const std::vector<double>& x) {
    std::vector<std::vector<double>> full(q.n, std::vector<double>(q.n, 0.0));
    for (int i = 0; i < q.n; ++i) full[i][i] = q.diag[i];
    for (const auto& [i, j, c] : q.offdiag) full[i][j] = full[j][i] = c / 2.0;
    double h = 0.0;
    for (int i = 0; i < q.n; ++i)
        for (int j = 0; j < q.n; ++j) h += full[i][j] * x[i] * x[j];
    return h;
}

}  // namespace

TEST_CASE("encode_maxcut evaluates to minus the cut size") {
    const QuboInstance q = encode_maxcut(triangle());
    CHECK(hamiltonian(q, std::vector<double>{1, 0, 0}, TNorm::Product) == -2.0);
    CHECK(hamiltonian(q, std::vector<double>{0, 0, 0}, TNorm::Product) == 0.0);

    const QuboInstance k4 = encode_maxcut(generate_regular(4, 3, 0));
    CHECK(hamiltonian(k4, std::vector<double>{1, 1, 0, 0}, TNorm::Product) == -4.0);

    for (double c : q.diag) CHECK(c <= 0.0);
    for (const auto& [i, j, c] : q.offdiag) CHECK(c > 0.0);
}

TEST_CASE("encode_mis counts selections and penalizes violated edges") {
    const QuboInstance q = encode_mis(triangle(), 2.0);
    CHECK(hamiltonian(q, std::vector<double>{1, 0, 0}, TNorm::Product) == -1.0);
    CHECK(hamiltonian(q, std::vector<double>{1, 1, 0}, TNorm::Product) == 0.0);

    const Graph path(3, {{0, 1}, {1, 2}});
    CHECK(exact_qubo_min(encode_mis(path, 2.0)).value == -2.0);

    CHECK_THROWS_AS(encode_mis(triangle(), 1.0), std::invalid_argument);
}

TEST_CASE("all t-norms agree with the quadratic form on binary inputs") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = std::uniform_int_distribution<int>(2, 10)(rng);
        const QuboInstance q = random_integer_instance(rng, n);
        for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1;
            const double quad = quadratic_form(q, x);
            for (TNorm t : {TNorm::Product, TNorm::Standard, TNorm::Lukasiewicz})
                REQUIRE(hamiltonian(q, x, t) == quad);
        }
    }
}

TEST_CASE("fuzzy hamiltonian spot values") {
    QuboInstance q;
    q.n = 2;
    q.diag = {0.0, 0.0};
    q.offdiag = {{0, 1, 2.0}};
    const std::vector<double> x = {0.6, 0.7};
    CHECK(hamiltonian(q, x, TNorm::Lukasiewicz) == Catch::Approx(0.6).margin(1e-15));
    CHECK(hamiltonian(q, x, TNorm::Standard) == Catch::Approx(1.2).margin(1e-15));
    CHECK(hamiltonian(q, x, TNorm::Product) == Catch::Approx(0.84).margin(1e-15));

    CHECK_THROWS_AS(hamiltonian(q, std::vector<double>{1.2, 0.0}, TNorm::Product),
                    std::domain_error);
    CHECK_THROWS_AS(hamiltonian(q, std::vector<double>{-0.1, 0.0}, TNorm::Product),
                    std::domain_error);
}

TEST_CASE("hamiltonian_grad spot values") {
    QuboInstance q;
    q.n = 2;
    q.diag = {0.0, 0.0};
    q.offdiag = {{0, 1, 2.0}};

    const auto grad_prod = hamiltonian_grad(q, std::vector<double>{0.5, 0.5}, TNorm::Product);
    CHECK(grad_prod == std::vector<double>{1.0, 1.0});

    // Lukasiewicz plateau: zero gradient below the x_i + x_j = 1 line
    const auto grad_luk = hamiltonian_grad(q, std::vector<double>{0.3, 0.3}, TNorm::Lukasiewicz);
    CHECK(grad_luk == std::vector<double>{0.0, 0.0});
}

TEST_CASE("analytic gradients match finite differences away from kinks") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> interior(0.01, 0.99);
    int checked = 0;
    for (int rep = 0; rep < 60 && checked < 30; ++rep) {
        const int n = std::uniform_int_distribution<int>(2, 8)(rng);
        const QuboInstance q = random_integer_instance(rng, n);
        std::vector<double> x(n);
        for (double& v : x) v = interior(rng);

        for (TNorm t : {TNorm::Product, TNorm::Standard, TNorm::Lukasiewicz}) {
            // skip points within 1e-3 of a subgradient kink
            bool near_kink = false;
            if (t == TNorm::Standard)
                for (const auto& [i, j, c] : q.offdiag)
                    near_kink |= std::abs(x[i] - x[j]) < 1e-3;
            if (t == TNorm::Lukasiewicz) {
                for (const auto& [i, j, c] : q.offdiag)
                    near_kink |= std::abs(x[i] + x[j] - 1.0) < 1e-3;
                for (int i = 0; i < n; ++i) near_kink |= std::abs(x[i] - 0.5) < 1e-3;
            }
            if (near_kink) continue;

            const auto analytic = hamiltonian_grad(q, x, t);
            const auto fd = finite_diff_grad(
                [&](std::span<const double> p) { return hamiltonian(q, p, t); }, x);
            for (int i = 0; i < n; ++i) {
                const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd[i])});
                REQUIRE(std::abs(analytic[i] - fd[i]) / denom < 1e-5);
            }
            ++checked;
        }
    }
    REQUIRE(checked >= 30);
}

TEST_CASE("objective_value scores assignments") {
    const Graph tri = triangle();
    CHECK(objective_value(Problem::MaxCut, tri, std::vector<uint8_t>{1, 0, 0}) ==
          std::pair{2.0, true});
    CHECK(objective_value(Problem::MIS, tri, std::vector<uint8_t>{1, 1, 0}) ==
          std::pair{0.0, false});
    CHECK(objective_value(Problem::MaxCut, tri, std::vector<uint8_t>{0, 0, 0}) ==
          std::pair{0.0, true});
    CHECK(objective_value(Problem::MIS, tri, std::vector<uint8_t>{0, 0, 0}) ==
          std::pair{0.0, true});
}

TEST_CASE("regularized_loss adds the requested penalty") {
    const QuboInstance q = encode_maxcut(triangle());
    const std::vector<double> half(3, 0.5);
    const double h = hamiltonian(q, half, TNorm::Product);

    CHECK(regularized_loss(q, half, TNorm::Product, Regularizer::L1, 0.0) == h);
    CHECK(regularized_loss(q, half, TNorm::Product, Regularizer::BinaryEntropy, 2.0) ==
          Catch::Approx(h + 2.0 * 3.0).margin(1e-12));  // entropy of 0.5 is one bit

    const std::vector<double> binary = {1.0, 0.0, 1.0};
    const double hb = hamiltonian(q, binary, TNorm::Product);
    CHECK(regularized_loss(q, binary, TNorm::Product, Regularizer::L1, 0.5) ==
          Catch::Approx(hb + 0.5 * 2.0).margin(1e-12));
    CHECK(regularized_loss(q, binary, TNorm::Product, Regularizer::BinaryEntropy, 0.5) == hb);

    CHECK_THROWS_AS(regularized_loss(q, half, TNorm::Product, Regularizer::L1, -1.0),
                    std::invalid_argument);
}

TEST_CASE("hamiltonian is bounded by the coefficient sums") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const QuboInstance q = random_integer_instance(rng, 8);
        double lo = 0.0, hi = 0.0;
        for (double c : q.diag) (c < 0 ? lo : hi) += c;
        for (const auto& [i, j, c] : q.offdiag) (c < 0 ? lo : hi) += c;
        std::vector<double> x(8);
        for (int trial = 0; trial < 20; ++trial) {
            for (double& v : x) v = unit(rng);
            for (TNorm t : {TNorm::Product, TNorm::Standard, TNorm::Lukasiewicz}) {
                const double h = hamiltonian(q, x, t);
                REQUIRE(h >= lo - 1e-12);
                REQUIRE(h <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("qubo text round trip") {
    const QuboInstance q = encode_mis(triangle(), 2.0);
    std::stringstream buf;
    write_qubo(q, buf);
    const QuboInstance r = read_qubo(buf, Problem::MIS, 2.0);
    CHECK(r.n == q.n);
    CHECK(r.diag == q.diag);
    REQUIRE(r.offdiag.size() == q.offdiag.size());
    for (size_t k = 0; k < q.offdiag.size(); ++k) {
        CHECK(r.offdiag[k].i == q.offdiag[k].i);
        CHECK(r.offdiag[k].j == q.offdiag[k].j);
        CHECK(r.offdiag[k].coeff == q.offdiag[k].coeff);
    }
}
