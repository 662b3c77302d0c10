#include "corn/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "corn/checkpoint.hpp"
#include "corn/optimizer.hpp"

namespace corn {

namespace {

constexpr std::uint64_t kShuffleStream = 3;

Tensor<float> gather_batch(const Dataset& dataset, const std::vector<std::size_t>& order,
                           std::size_t begin, std::size_t end, std::vector<int>& ranks) {
    const std::size_t d = dataset.num_features;
    std::vector<float> values((end - begin) * d);
    ranks.clear();
    ranks.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const double* row = dataset.row(order[i]);
        for (std::size_t c = 0; c < d; ++c) {
            values[(i - begin) * d + c] = static_cast<float>(row[c]);
        }
        ranks.push_back(dataset.labels[order[i]]);
    }
    return Tensor<float>::from(end - begin, d, std::move(values));
}

Tensor<float> loss_for_head(Tape<float>& tape, MlpModel<float>& model,
                            const typename MlpModel<float>::Forward& out,
                            const std::vector<int>& ranks, int num_ranks) {
    switch (model.config().head) {
        case HeadKind::Corn:
            return corn_loss(tape, out.logits, ranks, num_ranks);
        case HeadKind::OrNn:
            return ornn_loss(tape, out.logits, ranks, num_ranks);
        case HeadKind::Coral:
            return coral_loss(tape, out.shared, model.task_biases(), ranks, num_ranks);
        case HeadKind::CrossEntropy:
            return ce_loss(tape, out.logits, ranks, num_ranks);
    }
    throw std::logic_error("unreachable head kind");
}

double sample_sd(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double total = 0.0;
    for (const double v : values) total += (v - mean) * (v - mean);
    return std::sqrt(total / static_cast<double>(values.size() - 1));
}

void write_seed_artifacts(const std::string& out_dir, const Splits& splits,
                          const TrainReport& report, MlpModel<float>& best_model) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(out_dir) / ("seed_" + std::to_string(report.seed));
    fs::create_directories(dir);
    write_report_jsonl(report, (dir / "report.jsonl").string());
    save_checkpoint((dir / "checkpoint.bin").string(), best_model, splits.train.mean,
                    splits.train.stddev);
    write_index_manifest(splits.train.source_rows, (dir / "split_train.idx").string());
    write_index_manifest(splits.val.source_rows, (dir / "split_val.idx").string());
    write_index_manifest(splits.test.source_rows, (dir / "split_test.idx").string());
}

}  // namespace

void RunConfig::validate() const {
    if (num_ranks < 2) throw std::invalid_argument("config: need K >= 2 (--k)");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("config: learning rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
    if (hidden_dims.empty() || hidden_dims.size() > 2) {
        throw std::invalid_argument("config: expected one or two hidden layer widths");
    }
    if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
    if (weight_decay < 0.0) throw std::invalid_argument("config: weight decay must be >= 0");
}

void apply_method_defaults(RunConfig& config) {
    switch (config.method) {
        case HeadKind::Corn:
            if (config.learning_rate == 0.0) config.learning_rate = 0.001;
            if (config.batch_size == 0) config.batch_size = 128;
            if (config.hidden_dims.empty()) config.hidden_dims = {300, 300};
            break;
        case HeadKind::OrNn:
            if (config.learning_rate == 0.0) config.learning_rate = 0.0005;
            if (config.batch_size == 0) config.batch_size = 128;
            if (config.hidden_dims.empty()) config.hidden_dims = {300, 300};
            break;
        case HeadKind::Coral:
        case HeadKind::CrossEntropy:
            if (config.learning_rate == 0.0) config.learning_rate = 0.0005;
            if (config.batch_size == 0) config.batch_size = 64;
            if (config.hidden_dims.empty()) config.hidden_dims = {300, 200};
            break;
    }
}

Splits prepare_splits(const Dataset& raw, const RunConfig& config) {
    Splits splits;
    if (config.balance) {
        Rng balance_rng(mix_seed(config.split_spec.seed, 0xba1a7ce));
        const Dataset balanced = balance_classes(raw, balance_rng);
        splits = split(balanced, config.split_spec);
    } else {
        splits = split(raw, config.split_spec);
    }
    standardize(splits.train, {&splits.val, &splits.test});
    return splits;
}

std::vector<int> predict_dataset(MlpModel<float>& model, const Dataset& dataset,
                                 std::size_t eval_batch) {
    const bool was_training = model.training();
    model.set_training(false);
    std::vector<int> predictions;
    predictions.reserve(dataset.size());
    std::vector<std::size_t> identity(dataset.size());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    std::vector<int> ranks;
    for (std::size_t begin = 0; begin < dataset.size(); begin += eval_batch) {
        const std::size_t end = std::min(dataset.size(), begin + eval_batch);
        const auto x = gather_batch(dataset, identity, begin, end, ranks);
        Tape<float> tape;
        const auto out = model.forward(tape, x);
        const auto batch_ranks = predict_ranks(model.config().head, out.logits.values(),
                                               end - begin, model.config().num_ranks);
        predictions.insert(predictions.end(), batch_ranks.begin(), batch_ranks.end());
    }
    model.set_training(was_training);
    return predictions;
}

TrainReport train_single(const Splits& splits, const RunConfig& config, std::uint64_t seed,
                         MlpModel<float>* best_model, std::ostream* log) {
    config.validate();
    if (splits.train.size() == 0) throw std::invalid_argument("train split is empty");

    MlpConfig<float> model_config;
    model_config.input_dim = splits.train.num_features;
    model_config.hidden_dims = config.hidden_dims;
    model_config.leaky_slope = static_cast<float>(config.leaky_slope);
    model_config.dropout_p = static_cast<float>(config.dropout_p);
    model_config.head = config.method;
    model_config.num_ranks = config.num_ranks;
    model_config.seed = seed;

    auto model = MlpModel<float>::init(model_config);
    AdamConfig<float> adam_config;
    adam_config.learning_rate = static_cast<float>(config.learning_rate);
    adam_config.weight_decay = static_cast<float>(config.weight_decay);
    AdamW<float> optimizer(model.parameters(), model.weight_decay_mask(), adam_config);

    TrainReport report;
    report.seed = seed;
    report.method = head_name(config.method);
    report.num_ranks = config.num_ranks;
    report.hidden_dims = config.hidden_dims;
    report.learning_rate = config.learning_rate;
    report.batch_size = config.batch_size;
    report.total_epochs = config.epochs;
    report.weight_decay = config.weight_decay;
    report.dropout_p = config.dropout_p;

    const std::size_t n = splits.train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_rmse = std::numeric_limits<double>::infinity();
    std::vector<std::vector<float>> best_snapshot;
    std::vector<int> ranks;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(mix_seed(seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        model.set_training(true);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
            const std::size_t end = std::min(n, begin + config.batch_size);
            const auto x = gather_batch(splits.train, order, begin, end, ranks);
            Tape<float> tape;
            const auto out = model.forward(tape, x);
            const auto loss = loss_for_head(tape, model, out, ranks, config.num_ranks);
            model.zero_grad();
            tape.backward(loss);
            optimizer.step();
            epoch_loss += static_cast<double>(loss.item()) * static_cast<double>(end - begin);
        }
        epoch_loss /= static_cast<double>(n);

        const auto val_pred = predict_dataset(model, splits.val);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss;
        record.val_mae = mae(splits.val.labels, val_pred);
        record.val_rmse = rmse(splits.val.labels, val_pred);
        report.epochs.push_back(record);

        if (record.val_rmse < best_rmse) {
            best_rmse = record.val_rmse;
            best_snapshot = model.snapshot_parameters();
        }
        if (log) {
            *log << "[" << report.method << " seed " << seed << "] epoch " << epoch << "/"
                 << config.epochs << " train_loss " << std::fixed << std::setprecision(4)
                 << record.train_loss << " val_mae " << record.val_mae << " val_rmse "
                 << record.val_rmse << std::defaultfloat << "\n";
        }
    }

    report.selected_epoch = select_best(report.epochs);
    model.restore_parameters(best_snapshot);

    const auto test_pred = predict_dataset(model, splits.test);
    report.test_mae = mae(splits.test.labels, test_pred);
    report.test_rmse = rmse(splits.test.labels, test_pred);
    if (log) {
        *log << "[" << report.method << " seed " << seed << "] selected epoch "
             << report.selected_epoch << ": test_mae " << std::fixed << std::setprecision(4)
             << report.test_mae << " test_rmse " << report.test_rmse << std::defaultfloat << "\n";
    }
    if (best_model) *best_model = std::move(model);
    return report;
}

MethodSummary summarize(HeadKind method, const std::vector<TrainReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("summarize: no reports");
    MethodSummary summary;
    summary.method = method;
    summary.reports = reports;
    std::vector<double> maes, rmses;
    for (const auto& report : reports) {
        maes.push_back(report.test_mae);
        rmses.push_back(report.test_rmse);
    }
    summary.avg_mae = std::accumulate(maes.begin(), maes.end(), 0.0) /
                      static_cast<double>(maes.size());
    summary.avg_rmse = std::accumulate(rmses.begin(), rmses.end(), 0.0) /
                       static_cast<double>(rmses.size());
    summary.sd_mae = sample_sd(maes, summary.avg_mae);
    summary.sd_rmse = sample_sd(rmses, summary.avg_rmse);
    return summary;
}

std::string format_summary_table(const std::vector<MethodSummary>& methods) {
    std::ostringstream out;
    out << std::left << std::setw(8) << "METHOD" << std::setw(10) << "SEED" << std::right
        << std::setw(12) << "TEST MAE" << std::setw(12) << "TEST RMSE" << "\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& method : methods) {
        for (const auto& report : method.reports) {
            out << std::left << std::setw(8) << head_name(method.method) << std::setw(10)
                << report.seed << std::right << std::setw(12) << report.test_mae << std::setw(12)
                << report.test_rmse << "\n";
        }
        std::ostringstream mae_cell, rmse_cell;
        mae_cell << std::fixed << std::setprecision(4) << method.avg_mae << "±" << method.sd_mae;
        rmse_cell << std::fixed << std::setprecision(4) << method.avg_rmse << "±" << method.sd_rmse;
        out << std::left << std::setw(8) << head_name(method.method) << std::setw(10) << "AVG±SD"
            << std::right << std::setw(16) << mae_cell.str() << std::setw(16) << rmse_cell.str()
            << "\n";
    }
    return out.str();
}

RunArtifacts run_train(const Dataset& raw, const RunConfig& config_in, std::ostream* log) {
    RunConfig config = config_in;
    apply_method_defaults(config);
    config.validate();

    const Splits splits = prepare_splits(raw, config);
    std::vector<TrainReport> reports;
    for (const std::uint64_t seed : config.seeds) {
        MlpModel<float> best;
        TrainReport report = train_single(splits, config, seed, &best, log);
        if (!config.out_dir.empty()) {
            write_seed_artifacts(config.out_dir, splits, report, best);
        }
        reports.push_back(std::move(report));
    }

    RunArtifacts artifacts;
    artifacts.summary = summarize(config.method, reports);
    artifacts.summary_text = format_summary_table({artifacts.summary});
    if (!config.out_dir.empty()) {
        std::ofstream file(std::filesystem::path(config.out_dir) / "summary.txt");
        file << artifacts.summary_text;
    }
    return artifacts;
}

CompareArtifacts run_compare(const Dataset& raw, const RunConfig& base, std::ostream* log) {
    CompareArtifacts artifacts;
    const HeadKind methods[] = {HeadKind::Corn, HeadKind::OrNn, HeadKind::Coral,
                                HeadKind::CrossEntropy};
    for (const HeadKind method : methods) {
        RunConfig config = base;
        config.method = method;
        if (!base.out_dir.empty()) {
            config.out_dir =
                (std::filesystem::path(base.out_dir) / head_name(method)).string();
        }
        apply_method_defaults(config);
        RunArtifacts run = run_train(raw, config, log);
        artifacts.methods.push_back(std::move(run.summary));
    }
    artifacts.summary_text = format_summary_table(artifacts.methods);
    if (!base.out_dir.empty()) {
        std::filesystem::create_directories(base.out_dir);
        std::ofstream file(std::filesystem::path(base.out_dir) / "summary.txt");
        file << artifacts.summary_text;
    }
    return artifacts;
}

EvalResult evaluate_checkpoint(const std::string& checkpoint_path, const Dataset& raw,
                               const std::vector<std::size_t>* manifest) {
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    Dataset dataset = manifest ? select_by_source_rows(raw, *manifest) : raw;
    if (dataset.num_features != loaded.model.config().input_dim) {
        throw std::runtime_error("dataset has " + std::to_string(dataset.num_features) +
                                 " features but the checkpoint expects " +
                                 std::to_string(loaded.model.config().input_dim));
    }
    apply_standardization(dataset, loaded.mean, loaded.stddev);
    const auto predictions = predict_dataset(loaded.model, dataset);
    EvalResult result;
    result.mae = mae(dataset.labels, predictions);
    result.rmse = rmse(dataset.labels, predictions);
    result.count = dataset.size();
    return result;
}

}  // namespace corn
