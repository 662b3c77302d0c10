#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "corn/data.hpp"
#include "corn/losses.hpp"
#include "corn/metrics.hpp"
#include "corn/model.hpp"

namespace corn {

/// One training configuration. Zero/empty hyperparameters mean "use the
/// per-method default" (see apply_method_defaults).
struct RunConfig {
    HeadKind method = HeadKind::Corn;
    std::string data_path;
    int num_ranks = 0;
    std::vector<std::size_t> hidden_dims;  // empty -> method default
    double learning_rate = 0.0;            // 0 -> method default
    std::size_t batch_size = 0;            // 0 -> method default
    int epochs = 200;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::string out_dir;  // empty -> no files written
    double dropout_p = 0.2;
    double leaky_slope = 0.01;
    double weight_decay = 0.2;
    bool balance = true;
    SplitSpec split_spec;  // split_spec.seed governs balancing + partitioning

    void validate() const;
};

/// Tuned tabular defaults per method: corn lr 0.001 batch 128 hidden 300/300;
/// ornn lr 0.0005 batch 128 hidden 300/300; coral and ce lr 0.0005 batch 64
/// hidden 300/200. Only fills fields left at their "unset" value.
void apply_method_defaults(RunConfig& config);

/// balance (optional) -> split -> standardize with training statistics.
Splits prepare_splits(const Dataset& raw, const RunConfig& config);

/// Trains one seed on prepared splits; returns the report and, when
/// best_model is non-null, leaves the selected-epoch model there.
TrainReport train_single(const Splits& splits, const RunConfig& config, std::uint64_t seed,
                         MlpModel<float>* best_model, std::ostream* log);

/// Batched eval-mode rank prediction over a dataset.
std::vector<int> predict_dataset(MlpModel<float>& model, const Dataset& dataset,
                                 std::size_t eval_batch = 4096);

struct MethodSummary {
    HeadKind method = HeadKind::Corn;
    std::vector<TrainReport> reports;  // one per seed
    double avg_mae = 0.0;
    double sd_mae = 0.0;
    double avg_rmse = 0.0;
    double sd_rmse = 0.0;
};

MethodSummary summarize(HeadKind method, const std::vector<TrainReport>& reports);

/// Fixed-width per-seed rows plus an AVG±SD row per method.
std::string format_summary_table(const std::vector<MethodSummary>& methods);

struct RunArtifacts {
    MethodSummary summary;
    std::string summary_text;
};

/// Full train command: prepares data, loops over seeds, optionally writes
/// per-seed report.jsonl / checkpoint.bin / split manifests and a summary.txt
/// under config.out_dir.
RunArtifacts run_train(const Dataset& raw, const RunConfig& config, std::ostream* log);

struct CompareArtifacts {
    std::vector<MethodSummary> methods;  // corn, ornn, coral, ce
    std::string summary_text;
};

/// Runs all four methods on identical splits and seeds, each with its own
/// tuned defaults (fields explicitly set in `base` override the defaults for
/// every method).
CompareArtifacts run_compare(const Dataset& raw, const RunConfig& base, std::ostream* log);

struct EvalResult {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t count = 0;
};

/// Loads a checkpoint, applies its stored standardization to the dataset
/// (restricted to a manifest of source rows when given) and reports MAE/RMSE.
EvalResult evaluate_checkpoint(const std::string& checkpoint_path, const Dataset& raw,
                               const std::vector<std::size_t>* manifest);

}  // namespace corn
