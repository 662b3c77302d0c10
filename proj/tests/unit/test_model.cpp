#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "corn/model.hpp"
#include "corn/rng.hpp"
#include "gradcheck.hpp"

using corn::HeadKind;
using corn::MlpConfig;
using corn::MlpModel;
using corn::Rng;
using corn::Tape;
using corn::Tensor;
using TD = Tensor<double>;

namespace {

MlpConfig<double> small_config(HeadKind head, std::uint64_t seed = 0) {
    MlpConfig<double> config;
    config.input_dim = 3;
    config.hidden_dims = {5, 4};
    config.head = head;
    config.num_ranks = 4;
    config.seed = seed;
    return config;
}

void zero_parameters(MlpModel<double>& model) {
    for (auto& p : model.parameters()) {
        for (auto& v : p.values()) v = 0.0;
    }
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("zero model emits zero logits and decodes to the lowest rank") {
    auto model = MlpModel<double>::init(small_config(HeadKind::Corn));
    zero_parameters(model);
    Tape<double> tape;
    const auto out = model.forward(tape, TD::zeros(2, 3));
    for (const double z : out.logits.values()) CHECK(z == 0.0);
    const auto ranks =
        corn::predict_ranks(HeadKind::Corn, out.logits.values(), 2, 4);
    CHECK(ranks == std::vector<int>{1, 1});  // sigma(0)=0.5, strict threshold
}

TEST_CASE("eval mode forward is bitwise deterministic") {
    auto model = MlpModel<double>::init(small_config(HeadKind::OrNn, 3));
    model.set_training(false);
    std::vector<double> x_vals = {0.4, -1.2, 0.7, 2.0, 0.0, -0.5};
    Tape<double> t1, t2;
    const auto first = model.forward(t1, TD::from(2, 3, x_vals)).logits;
    const auto second = model.forward(t2, TD::from(2, 3, x_vals)).logits;
    REQUIRE(first.size() == second.size());
    CHECK(std::memcmp(first.values().data(), second.values().data(),
                      first.size() * sizeof(double)) == 0);
}

TEST_CASE("single hidden unit reproduces the hand-computed affine chain") {
    MlpConfig<double> config;
    config.input_dim = 1;
    config.hidden_dims = {1};
    config.head = HeadKind::Corn;
    config.num_ranks = 2;
    auto model = MlpModel<double>::init(config);
    // x=-2: pre = -2*0.5 + 0.25 = -0.75; leaky(0.01) -> -0.0075;
    // logit = -0.0075*2 + 0.1 = 0.085
    auto params = model.parameters();
    params[0].values() = {0.5};   // hidden weight
    params[1].values() = {0.25};  // hidden bias
    params[2].values() = {2.0};   // output weight
    params[3].values() = {0.1};   // output bias
    Tape<double> tape;
    const auto out = model.forward(tape, TD::from(1, 1, {-2.0}));
    CHECK(out.logits.item() == doctest::Approx(0.085).epsilon(1e-12));
}

TEST_CASE("initialization is seed-deterministic and respects the fan-in bound") {
    const auto config = small_config(HeadKind::CrossEntropy, 11);
    auto a = MlpModel<double>::init(config);
    auto b = MlpModel<double>::init(config);
    auto c = MlpModel<double>::init(small_config(HeadKind::CrossEntropy, 12));
    auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].values() == pb[i].values());
        if (pa[i].values() != pc[i].values()) any_diff = true;
    }
    CHECK(any_diff);

    MlpConfig<double> wide;
    wide.input_dim = 100;
    wide.hidden_dims = {4};
    wide.head = HeadKind::CrossEntropy;
    wide.num_ranks = 3;
    auto model = MlpModel<double>::init(wide);
    for (const double w : model.parameters()[0].values()) {
        REQUIRE(std::abs(w) <= 0.1);  // sqrt(1/100)
    }
    for (const double b0 : model.parameters()[1].values()) REQUIRE(b0 == 0.0);
}

TEST_CASE("config validation rejects bad shapes") {
    auto config = small_config(HeadKind::Corn);
    config.hidden_dims = {};
    CHECK_THROWS_AS(MlpModel<double>::init(config), std::invalid_argument);
    config.hidden_dims = {4, 4, 4};
    CHECK_THROWS_AS(MlpModel<double>::init(config), std::invalid_argument);
    config = small_config(HeadKind::Corn);
    config.num_ranks = 1;
    CHECK_THROWS_AS(MlpModel<double>::init(config), std::invalid_argument);
    config = small_config(HeadKind::Corn);
    config.dropout_p = 1.0;
    CHECK_THROWS_AS(MlpModel<double>::init(config), std::invalid_argument);

    auto model = MlpModel<double>::init(small_config(HeadKind::Corn));
    Tape<double> tape;
    CHECK_THROWS_AS(model.forward(tape, TD::zeros(1, 7)), std::invalid_argument);
}

TEST_CASE("output widths per head") {
    Tape<double> tape;
    const auto x = TD::zeros(1, 3);
    CHECK(MlpModel<double>::init(small_config(HeadKind::Corn)).forward(tape, x).logits.cols() == 3);
    CHECK(MlpModel<double>::init(small_config(HeadKind::OrNn)).forward(tape, x).logits.cols() == 3);
    CHECK(MlpModel<double>::init(small_config(HeadKind::Coral)).forward(tape, x).logits.cols() == 3);
    CHECK(MlpModel<double>::init(small_config(HeadKind::CrossEntropy)).forward(tape, x).logits.cols() ==
          4);
    auto coral = MlpModel<double>::init(small_config(HeadKind::Coral));
    CHECK(coral.output_layer().weight.cols() == 1);  // one shared weight column
    CHECK(coral.task_biases().cols() == 3);
    auto corn_model = MlpModel<double>::init(small_config(HeadKind::Corn));
    CHECK_THROWS_AS(corn_model.task_biases(), std::logic_error);
}

TEST_CASE("shared-weight head: per-task logit differences depend only on the biases") {
    auto model = MlpModel<double>::init(small_config(HeadKind::Coral, 5));
    auto biases = model.parameters().back();
    biases.values() = {0.7, 0.1, -0.4};
    Rng rng(6);
    Tape<double> tape;
    std::vector<double> x_vals(2 * 3);
    for (auto& v : x_vals) v = rng.uniform(-2.0, 2.0);
    const auto out = model.forward(tape, TD::from(2, 3, x_vals));
    for (std::size_t row = 0; row < 2; ++row) {
        for (std::size_t k = 0; k < 3; ++k) {
            for (std::size_t j = 0; j < 3; ++j) {
                const double diff = out.logits(row, k) - out.logits(row, j);
                REQUIRE(diff == doctest::Approx(biases.values()[k] - biases.values()[j])
                                    .epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("train and eval modes differ only through dropout") {
    auto config = small_config(HeadKind::Corn, 2);
    config.dropout_p = 0.0;
    auto model = MlpModel<double>::init(config);
    const std::vector<double> x_vals = {1.0, -0.3, 0.6};
    model.set_training(true);
    Tape<double> t1;
    const auto train_out = model.forward(t1, TD::from(1, 3, x_vals)).logits;
    model.set_training(false);
    Tape<double> t2;
    const auto eval_out = model.forward(t2, TD::from(1, 3, x_vals)).logits;
    CHECK(train_out.values() == eval_out.values());
}

TEST_CASE("full-model loss gradients match finite differences for every head") {
    Rng rng(40);
    for (const HeadKind head :
         {HeadKind::Corn, HeadKind::OrNn, HeadKind::Coral, HeadKind::CrossEntropy}) {
        for (int trial = 0; trial < 2; ++trial) {
            MlpConfig<double> config;
            config.input_dim = 3;
            config.hidden_dims = {4, 3};
            config.dropout_p = 0.0;  // disabled for the check
            config.head = head;
            config.num_ranks = 4;
            const std::size_t batch = 3;
            std::vector<double> x_vals(batch * config.input_dim);
            std::vector<int> ranks(batch);

            // resample until no hidden pre-activation sits near the relu kink,
            // where central differences stop being a valid oracle
            for (;;) {
                config.seed = rng.next_u64();
                for (auto& v : x_vals) v = rng.uniform(-1.5, 1.5);
                for (auto& r : ranks) r = 1 + static_cast<int>(rng.below(4));
                auto probe = MlpModel<double>::init(config);
                probe.set_training(true);
                Tape<double> probe_tape;
                const auto out =
                    probe.forward(probe_tape, TD::from(batch, config.input_dim, x_vals));
                double margin = 1e9;
                for (const auto& pre : out.hidden_pre) {
                    for (const double v : pre.values()) margin = std::min(margin, std::abs(v));
                }
                if (margin > 1e-3) break;
            }

            auto model = MlpModel<double>::init(config);
            model.set_training(true);
            auto params = model.parameters();
            std::vector<double> flat;
            for (const auto& p : params) {
                flat.insert(flat.end(), p.values().begin(), p.values().end());
            }

            auto eval_loss = [&](const std::vector<double>& theta) {
                std::size_t offset = 0;
                for (auto& p : params) {
                    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(offset),
                              theta.begin() + static_cast<std::ptrdiff_t>(offset + p.size()),
                              p.values().begin());
                    offset += p.size();
                }
                Tape<double> tape;
                const auto out = model.forward(tape, TD::from(batch, config.input_dim, x_vals));
                switch (head) {
                    case HeadKind::Corn:
                        return corn::corn_loss(tape, out.logits, ranks, 4).item();
                    case HeadKind::OrNn:
                        return corn::ornn_loss(tape, out.logits, ranks, 4).item();
                    case HeadKind::Coral:
                        return corn::coral_loss(tape, out.shared, model.task_biases(), ranks, 4)
                            .item();
                    case HeadKind::CrossEntropy:
                        return corn::ce_loss(tape, out.logits, ranks, 4).item();
                }
                return 0.0;
            };

            // analytic gradient at the initial parameters
            Tape<double> tape;
            const auto out = model.forward(tape, TD::from(batch, config.input_dim, x_vals));
            Tensor<double> loss;
            switch (head) {
                case HeadKind::Corn: loss = corn::corn_loss(tape, out.logits, ranks, 4); break;
                case HeadKind::OrNn: loss = corn::ornn_loss(tape, out.logits, ranks, 4); break;
                case HeadKind::Coral:
                    loss = corn::coral_loss(tape, out.shared, model.task_biases(), ranks, 4);
                    break;
                case HeadKind::CrossEntropy:
                    loss = corn::ce_loss(tape, out.logits, ranks, 4);
                    break;
            }
            model.zero_grad();
            tape.backward(loss);
            std::vector<double> analytic;
            for (const auto& p : params) {
                analytic.insert(analytic.end(), p.grad().begin(), p.grad().end());
            }

            const auto result = gradcheck::compare(eval_loss, flat, analytic);
            REQUIRE(result.max_rel <= 1e-4);
        }
    }
}

TEST_SUITE_END();
