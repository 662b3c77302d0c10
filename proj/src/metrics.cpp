#include "corn/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace corn {

namespace {

void check_lengths(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("metric length mismatch: " + std::to_string(truth.size()) +
                                    " vs " + std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        throw std::invalid_argument("metrics need at least one example");
    }
}

}  // namespace

double mae(const std::vector<int>& truth, const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        total += std::abs(truth[i] - predicted[i]);
    }
    return total / static_cast<double>(truth.size());
}

double rmse(const std::vector<int>& truth, const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double diff = truth[i] - predicted[i];
        total += diff * diff;
    }
    return std::sqrt(total / static_cast<double>(truth.size()));
}

int select_best(const std::vector<EpochRecord>& epochs) {
    if (epochs.empty()) {
        throw std::invalid_argument("select_best: no epochs recorded");
    }
    int best = epochs.front().epoch;
    double best_rmse = epochs.front().val_rmse;
    for (const EpochRecord& record : epochs) {
        if (record.val_rmse < best_rmse) {
            best_rmse = record.val_rmse;
            best = record.epoch;
        }
    }
    return best;
}

std::string report_jsonl_string(const TrainReport& report) {
    std::string out;
    for (const EpochRecord& record : report.epochs) {
        nlohmann::ordered_json line;
        line["epoch"] = record.epoch;
        line["train_loss"] = record.train_loss;
        line["val_mae"] = record.val_mae;
        line["val_rmse"] = record.val_rmse;
        out += line.dump();
        out += '\n';
    }
    nlohmann::ordered_json summary;
    summary["summary"] = true;
    summary["method"] = report.method;
    summary["seed"] = report.seed;
    summary["num_ranks"] = report.num_ranks;
    summary["hidden_dims"] = report.hidden_dims;
    summary["learning_rate"] = report.learning_rate;
    summary["batch_size"] = report.batch_size;
    summary["epochs"] = report.total_epochs;
    summary["weight_decay"] = report.weight_decay;
    summary["dropout_p"] = report.dropout_p;
    summary["selected_epoch"] = report.selected_epoch;
    summary["test_mae"] = report.test_mae;
    summary["test_rmse"] = report.test_rmse;
    out += summary.dump();
    out += '\n';
    return out;
}

void write_report_jsonl(const TrainReport& report, const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("could not write report " + path);
    }
    file << report_jsonl_string(report);
}

}  // namespace corn
