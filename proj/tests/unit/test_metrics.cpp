#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "corn/metrics.hpp"
#include "corn/rng.hpp"

using corn::EpochRecord;
using corn::mae;
using corn::rmse;
using corn::select_best;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("mae by definition") {
    CHECK(mae({1, 3}, {2, 3}) == 0.5);
    CHECK(mae({4, 4, 4}, {4, 4, 4}) == 0.0);
    CHECK(mae(std::vector<int>(10, 1), std::vector<int>(10, 16)) == 15.0);
    CHECK_THROWS_AS(mae({1, 2}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(mae({}, {}), std::invalid_argument);
}

TEST_CASE("rmse by definition and rmse >= mae") {
    CHECK(rmse({1, 3}, {2, 3}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(rmse({2, 2}, {2, 2}) == 0.0);
    corn::Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> truth(20), pred(20);
        for (auto& t : truth) t = 1 + static_cast<int>(rng.below(16));
        for (auto& p : pred) p = 1 + static_cast<int>(rng.below(16));
        REQUIRE(rmse(truth, pred) >= mae(truth, pred) - 1e-12);
    }
}

TEST_CASE("metrics are permutation-invariant and zero only on equality") {
    corn::Rng rng(2);
    std::vector<int> truth(30), pred(30);
    for (auto& t : truth) t = 1 + static_cast<int>(rng.below(8));
    for (auto& p : pred) p = 1 + static_cast<int>(rng.below(8));
    std::vector<std::size_t> perm(30);
    for (std::size_t i = 0; i < 30; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<int> truth_p(30), pred_p(30);
    for (std::size_t i = 0; i < 30; ++i) {
        truth_p[i] = truth[perm[i]];
        pred_p[i] = pred[perm[i]];
    }
    CHECK(mae(truth, pred) == doctest::Approx(mae(truth_p, pred_p)).epsilon(1e-12));
    CHECK(rmse(truth, pred) == doctest::Approx(rmse(truth_p, pred_p)).epsilon(1e-12));

    if (truth != pred) {
        CHECK(mae(truth, pred) > 0.0);
        CHECK(rmse(truth, pred) > 0.0);
    }
}

TEST_CASE("best-epoch selection takes the earliest minimum validation rmse") {
    auto record = [](int epoch, double val_rmse) {
        EpochRecord r;
        r.epoch = epoch;
        r.val_rmse = val_rmse;
        return r;
    };
    CHECK(select_best({record(1, 1.2), record(2, 1.0), record(3, 1.1)}) == 2);
    CHECK(select_best({record(1, 1.0), record(2, 1.0)}) == 1);
    CHECK(select_best({record(1, 2.0)}) == 1);
    CHECK_THROWS_AS(select_best({}), std::invalid_argument);
}

TEST_CASE("report serialization is one json object per epoch plus a summary") {
    corn::TrainReport report;
    report.method = "corn";
    report.seed = 3;
    report.num_ranks = 4;
    report.hidden_dims = {8, 4};
    report.learning_rate = 0.01;
    report.batch_size = 32;
    report.total_epochs = 2;
    report.weight_decay = 0.2;
    report.dropout_p = 0.2;
    report.selected_epoch = 2;
    report.test_mae = 0.25;
    report.test_rmse = 0.5;
    EpochRecord e1{1, 0.9, 0.5, 0.8}, e2{2, 0.7, 0.4, 0.6};
    report.epochs = {e1, e2};

    std::stringstream lines(corn::report_jsonl_string(report));
    std::string line;
    std::vector<nlohmann::json> parsed;
    while (std::getline(lines, line)) parsed.push_back(nlohmann::json::parse(line));
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0]["epoch"] == 1);
    CHECK(parsed[1]["val_rmse"] == 0.6);
    CHECK(parsed[2]["summary"] == true);
    CHECK(parsed[2]["method"] == "corn");
    CHECK(parsed[2]["selected_epoch"] == 2);
    CHECK(parsed[2]["test_mae"] == 0.25);
    CHECK(parsed[2]["hidden_dims"] == std::vector<std::size_t>{8, 4});
}

TEST_SUITE_END();
