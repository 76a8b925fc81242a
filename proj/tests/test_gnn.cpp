#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>
#include <sstream>

#include "pignn/gnn.hpp"
#include "pignn/gradcheck.hpp"
#include "pignn/graph.hpp"
#include "pignn/oracle.hpp"

using namespace pignn;

TEST_CASE("normalized adjacency on tiny graphs") {
    SECTION("single node") {
        const Matrix a = normalized_adjacency(Graph(1, {}));
        REQUIRE(a.rows == 1);
        CHECK(a(0, 0) == 1.0);
    }
    SECTION("two connected nodes") {
        const Matrix a = normalized_adjacency(Graph(2, {{0, 1}}));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(a(i, j) == 0.5);
    }
    SECTION("symmetric with entries in (0, 1] on generated graphs") {
        std::mt19937_64 rng(2);
        const Graph g = generate_regular(30, 7, rng);
        const Matrix a = normalized_adjacency(g);
        for (int i = 0; i < 30; ++i)
            for (int j = 0; j < 30; ++j) {
                CHECK(a(i, j) == a(j, i));
                CHECK(a(i, j) >= 0.0);
                CHECK(a(i, j) <= 1.0);
            }
    }
}

TEST_CASE("init_model dimension defaults") {
    CHECK(init_model(100, 0).embeddings.cols == 10);
    CHECK(init_model(100, 0).w1.cols == 5);
    CHECK(init_model(1000, 0).embeddings.cols == 31);
    CHECK(init_model(1000, 0).w1.cols == 15);
    CHECK(init_model(1, 0).embeddings.cols == 1);
    CHECK(init_model(1, 0).w1.cols == 1);

    const Model a = init_model(50, 77);
    const Model b = init_model(50, 77);
    CHECK(a.embeddings == b.embeddings);
    CHECK(a.w1 == b.w1);
    CHECK(a.w2 == b.w2);

    const Model c = init_model(50, 78);
    CHECK_FALSE(a.embeddings == c.embeddings);

    const Model d = init_model(50, 0, {.d0 = 4, .d1 = 3});
    CHECK(d.embeddings.cols == 4);
    CHECK(d.w1.cols == 3);
}

TEST_CASE("forward with zero weights") {
    const Graph g = generate_regular(6, 3, 1);
    const Matrix adj = normalized_adjacency(g);
    for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::StepSte}) {
        Model m = init_model(6, 0, {}, {kind});
        for (double& v : m.w2.data) v = 0.0;
        const ForwardResult out = forward(m, adj);
        for (int i = 0; i < 6; ++i) {
            CHECK(out.a_pre[i] == 0.0);
            CHECK(out.a_post[i] == (kind == ActivationKind::Sigmoid ? 0.5 : 0.0));
        }
    }
}

TEST_CASE("tempered sigmoid at unit inverse temperature equals plain sigmoid") {
    const Graph g = generate_regular(8, 3, 4);
    const Matrix adj = normalized_adjacency(g);
    Model plain = init_model(8, 5, {}, {ActivationKind::Sigmoid});
    Model temp = plain;
    temp.activation.kind = ActivationKind::TemperedSigmoid;
    const auto a = forward(plain, adj);
    const auto b = forward(temp, adj, 1.0);
    CHECK(a.a_post == b.a_post);
}

TEST_CASE("activation outputs stay in range; step outputs are exactly binary") {
    std::mt19937_64 rng(9);
    for (ActivationKind kind :
         {ActivationKind::Sigmoid, ActivationKind::TemperedSigmoid, ActivationKind::StepSte,
          ActivationKind::StepSigmoidBackward}) {
        const Graph g = generate_regular(10, 3, rng);
        const Model m = init_model(10, rng(), {}, {kind});
        const double inv_temp = kind == ActivationKind::TemperedSigmoid ? 17.0 : 1.0;
        const auto out = forward(m, normalized_adjacency(g), inv_temp);
        for (double v : out.a_post) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (kind == ActivationKind::StepSte || kind == ActivationKind::StepSigmoidBackward)
                CHECK((v == 0.0 || v == 1.0));
        }
    }
}

TEST_CASE("backward surrogate derivatives at reference points") {
    const ActivationVariant ste{ActivationKind::StepSte};
    CHECK(activation_backward_derivative(ste, 0.5, 1.0) == 1.0);
    CHECK(activation_backward_derivative(ste, 2.0, 1.0) == 0.0);
    CHECK(activation_backward_derivative(ste, -0.5, 1.0) == 0.0);

    const ActivationVariant sig{ActivationKind::StepSigmoidBackward};
    CHECK(activation_backward_derivative(sig, 0.0, 1.0) == 0.25);
}

TEST_CASE("full-network gradients match finite differences") {
    std::mt19937_64 rng(13);
    int checked = 0;
    for (int rep = 0; rep < 40 && checked < 10; ++rep) {
        const int n = std::uniform_int_distribution<int>(4, 10)(rng);
        int d = std::uniform_int_distribution<int>(1, n - 1)(rng);
        if ((n * d) % 2 != 0) d = d > 1 ? d - 1 : d + 1;
        const Graph g = generate_regular(n, d, rng);
        const QuboInstance q = encode_maxcut(g);
        const VariantSpec variant = variant_from_name("baseline");
        const Model m = init_model(n, rng(), {}, variant.activation);
        const GradCheckPoint pt = gradcheck_point(g, q, variant, m, 1.0);
        if (pt.at_kink) continue;
        CHECK(pt.max_err < 1e-4);
        ++checked;
    }
    REQUIRE(checked >= 10);
}

TEST_CASE("adam step behavior") {
    SECTION("zero gradient leaves parameters unchanged") {
        Matrix p(2, 2);
        p.data = {1.0, -2.0, 3.0, 4.0};
        const Matrix before = p;
        Matrix zero(2, 2);
        AdamTensorState st;
        adam_step(p, zero, st, 0.1, 1);
        CHECK(p == before);
    }
    SECTION("first step moves by about lr in the gradient sign direction") {
        Matrix p(1, 2);
        p.data = {1.0, 1.0};
        Matrix g(1, 2);
        g.data = {0.5, -3.0};
        AdamTensorState st;
        adam_step(p, g, st, 0.01, 1);
        CHECK(p.data[0] == Catch::Approx(1.0 - 0.01).margin(1e-9));
        CHECK(p.data[1] == Catch::Approx(1.0 + 0.01).margin(1e-9));
    }
    SECTION("shape mismatch is rejected") {
        Matrix p(2, 2), g(1, 2);
        AdamTensorState st;
        CHECK_THROWS_AS(adam_step(p, g, st, 0.1, 1), std::invalid_argument);
    }
}

TEST_CASE("relabeling nodes permutes the outputs") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 8; ++rep) {
        const int n = std::uniform_int_distribution<int>(4, 8)(rng);
        int d = std::uniform_int_distribution<int>(1, n - 1)(rng);
        if ((n * d) % 2 != 0) d = d > 1 ? d - 1 : d + 1;
        const Graph g = generate_regular(n, d, rng);
        const Model m = init_model(n, rng());

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);

        std::vector<Graph::Edge> edges;
        for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
        const Graph h(n, std::move(edges));
        Model pm = m;
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < m.embeddings.cols; ++c)
                pm.embeddings(perm[i], c) = m.embeddings(i, c);

        const auto base = forward(m, normalized_adjacency(g));
        const auto permuted = forward(pm, normalized_adjacency(h));
        for (int i = 0; i < n; ++i) {
            CHECK(permuted.a_pre[perm[i]] == Catch::Approx(base.a_pre[i]).margin(1e-10));
            CHECK(permuted.a_post[perm[i]] == Catch::Approx(base.a_post[i]).margin(1e-10));
        }
    }
}

TEST_CASE("tempered sigmoid converges pointwise to the step function") {
    for (double x : {-2.0, -0.5, -0.01, 0.01, 0.3, 1.0, 4.0}) {
        const double k = 50.0 / std::abs(x);
        const double step = step_activation(x, 0.0, 1.0);
        CHECK(std::abs(sigmoid(x * k) - step) < 1e-6);
        CHECK(std::abs(sigmoid(x * (k + 3.0)) - step) < 1e-6);
    }
}

TEST_CASE("checkpoint round trip is lossless") {
    const Model m = init_model(23, 99, {}, {ActivationKind::StepSte});
    std::stringstream buf;
    save_model(m, buf);
    const Model r = load_model(buf);
    CHECK(r.embeddings == m.embeddings);
    CHECK(r.w1 == m.w1);
    CHECK(r.w2 == m.w2);
    CHECK(r.activation.kind == m.activation.kind);
}

TEST_CASE("forward validates shapes and temperature") {
    const Graph g = generate_regular(6, 3, 1);
    const Matrix adj = normalized_adjacency(g);
    const Model m = init_model(6, 0);
    CHECK_THROWS_AS(forward(m, adj, 0.5), std::invalid_argument);
    const Model wrong = init_model(7, 0);
    CHECK_THROWS_AS(forward(wrong, adj), std::invalid_argument);
}
