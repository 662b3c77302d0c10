#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace corn {

/// Mean absolute error over integer rank indices.
double mae(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Root mean squared error over integer rank indices.
double rmse(const std::vector<int>& truth, const std::vector<int>& predicted);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_mae = 0.0;
    double val_rmse = 0.0;
};

/// Earliest epoch (1-based) attaining the minimum validation RMSE.
int select_best(const std::vector<EpochRecord>& epochs);

/// One training run: per-epoch curve, the selected checkpoint epoch, and the
/// test metrics of the selected model, plus a config snapshot.
struct TrainReport {
    std::vector<EpochRecord> epochs;
    int selected_epoch = 0;
    double test_mae = 0.0;
    double test_rmse = 0.0;
    std::uint64_t seed = 0;

    // config snapshot
    std::string method;
    int num_ranks = 0;
    std::vector<std::size_t> hidden_dims;
    double learning_rate = 0.0;
    std::size_t batch_size = 0;
    int total_epochs = 0;
    double weight_decay = 0.0;
    double dropout_p = 0.0;
};

/// Line-delimited records: one JSON object per epoch, then one summary object.
void write_report_jsonl(const TrainReport& report, const std::string& path);
std::string report_jsonl_string(const TrainReport& report);

}  // namespace corn
