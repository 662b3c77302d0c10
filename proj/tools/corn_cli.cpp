#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corn/checkpoint.hpp"
#include "corn/data.hpp"
#include "corn/train.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "expected a comma-separated list");
    return seeds;
}

std::vector<std::size_t> parse_dim_list(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        dims.push_back(std::stoull(item));
    }
    return dims;
}

/// Flag-shaped options for train/compare; a key=value config file applied
/// afterwards overrides whatever the flags set.
struct TrainOptions {
    std::string method = "corn";
    std::string data;
    int num_ranks = 0;
    std::string hidden;
    double learning_rate = 0.0;
    std::size_t batch_size = 0;
    int epochs = 200;
    std::string seeds = "0,1,2,3,4";
    std::string out_dir;
    std::string config_file;
    double dropout = 0.2;
    double weight_decay = 0.2;
    std::uint64_t split_seed = 0;
    bool no_balance = false;
};

void add_train_flags(CLI::App* cmd, TrainOptions& opts, bool with_method) {
    if (with_method) {
        cmd->add_option("--method", opts.method, "one of corn|coral|ornn|ce");
    }
    cmd->add_option("--data", opts.data, "dataset CSV (features then integer label)")->required();
    cmd->add_option("--k", opts.num_ranks, "number of ordered ranks")->required();
    cmd->add_option("--hidden", opts.hidden, "hidden widths, e.g. 300,300 (default per method)");
    cmd->add_option("--lr", opts.learning_rate, "learning rate (default per method)");
    cmd->add_option("--batch-size", opts.batch_size, "minibatch size (default per method)");
    cmd->add_option("--epochs", opts.epochs, "training epochs (default 200)");
    cmd->add_option("--seeds", opts.seeds, "comma-separated seed list (default 0,1,2,3,4)");
    cmd->add_option("--out", opts.out_dir, "output directory for reports and checkpoints")
        ->required();
    cmd->add_option("--config", opts.config_file,
                    "key=value file; its entries override the flags above");
    cmd->add_option("--dropout", opts.dropout, "dropout probability (default 0.2)");
    cmd->add_option("--weight-decay", opts.weight_decay, "decoupled weight decay (default 0.2)");
    cmd->add_option("--split-seed", opts.split_seed,
                    "seed for class balancing and the train/val/test split (default 0)");
    cmd->add_flag("--no-balance", opts.no_balance, "skip class balancing");
}

void apply_config_file(TrainOptions& opts) {
    if (opts.config_file.empty()) return;
    std::ifstream file(opts.config_file);
    if (!file) throw std::runtime_error("could not open config file " + opts.config_file);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(file, line)) {
        ++line_number;
        const auto content_end = line.find('#');
        std::string content = line.substr(0, content_end);
        const auto begin = content.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(opts.config_file + ":" + std::to_string(line_number) +
                                     ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key == "method") opts.method = value;
        else if (key == "data") opts.data = value;
        else if (key == "k") opts.num_ranks = std::stoi(value);
        else if (key == "hidden") opts.hidden = value;
        else if (key == "lr") opts.learning_rate = std::stod(value);
        else if (key == "batch-size" || key == "batch_size") opts.batch_size = std::stoull(value);
        else if (key == "epochs") opts.epochs = std::stoi(value);
        else if (key == "seeds") opts.seeds = value;
        else if (key == "out") opts.out_dir = value;
        else if (key == "dropout") opts.dropout = std::stod(value);
        else if (key == "weight-decay" || key == "weight_decay") opts.weight_decay = std::stod(value);
        else if (key == "split-seed" || key == "split_seed") opts.split_seed = std::stoull(value);
        else if (key == "balance") opts.no_balance = (value == "false" || value == "0");
        else {
            throw std::runtime_error(opts.config_file + ":" + std::to_string(line_number) +
                                     ": unknown key '" + key + "'");
        }
    }
}

corn::RunConfig to_run_config(const TrainOptions& opts) {
    corn::RunConfig config;
    config.method = corn::parse_head(opts.method);
    config.data_path = opts.data;
    config.num_ranks = opts.num_ranks;
    config.hidden_dims = parse_dim_list(opts.hidden);
    config.learning_rate = opts.learning_rate;
    config.batch_size = opts.batch_size;
    config.epochs = opts.epochs;
    config.seeds = parse_seed_list(opts.seeds);
    config.out_dir = opts.out_dir;
    config.dropout_p = opts.dropout;
    config.weight_decay = opts.weight_decay;
    config.balance = !opts.no_balance;
    config.split_spec.seed = opts.split_seed;
    return config;
}

corn::Dataset load_and_report(const std::string& path, int num_ranks) {
    const corn::Dataset dataset = corn::load_csv(path, num_ranks);
    std::cerr << path << ": " << dataset.size() << " rows, " << dataset.num_features
              << " features, K=" << dataset.num_ranks << ", label histogram";
    for (const std::size_t count : dataset.label_histogram()) std::cerr << ' ' << count;
    std::cerr << '\n';
    return dataset;
}

int cmd_train(const TrainOptions& opts_in) {
    TrainOptions opts = opts_in;
    apply_config_file(opts);
    const corn::RunConfig config = to_run_config(opts);
    const corn::Dataset dataset = load_and_report(config.data_path, config.num_ranks);
    const corn::RunArtifacts artifacts = corn::run_train(dataset, config, &std::cerr);
    std::cout << artifacts.summary_text;
    return 0;
}

int cmd_compare(const TrainOptions& opts_in) {
    TrainOptions opts = opts_in;
    apply_config_file(opts);
    const corn::RunConfig config = to_run_config(opts);
    const corn::Dataset dataset = load_and_report(config.data_path, config.num_ranks);
    const corn::CompareArtifacts artifacts = corn::run_compare(dataset, config, &std::cerr);
    std::cout << artifacts.summary_text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ordinal regression via conditional task probabilities, with the"
                 " coral/ornn/ce reference methods"};
    app.require_subcommand(1);

    TrainOptions train_opts;
    CLI::App* train = app.add_subcommand("train", "train one method and write reports");
    add_train_flags(train, train_opts, true);

    TrainOptions compare_opts;
    CLI::App* compare =
        app.add_subcommand("compare", "train all four methods on identical splits and seeds");
    add_train_flags(compare, compare_opts, false);

    std::string eval_checkpoint, eval_data, eval_indices;
    int eval_k = 0;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
    evaluate->add_option("--checkpoint", eval_checkpoint, "checkpoint.bin from train")->required();
    evaluate->add_option("--data", eval_data, "dataset CSV")->required();
    evaluate->add_option("--indices", eval_indices,
                         "optional split manifest restricting evaluation to those rows");
    evaluate->add_option("--k", eval_k, "rank count of the CSV (default: from checkpoint)");

    std::size_t synth_n = 1000, synth_d = 10;
    int synth_k = 5;
    double synth_noise = 0.1;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic ordinal dataset CSV");
    synth->add_option("--n", synth_n, "number of rows (default 1000)");
    synth->add_option("--d", synth_d, "number of features (default 10)");
    synth->add_option("--k", synth_k, "number of ranks (default 5)");
    synth->add_option("--noise", synth_noise, "latent noise level (default 0.1)");
    synth->add_option("--seed", synth_seed, "generator seed (default 0)");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_opts);
        if (compare->parsed()) return cmd_compare(compare_opts);
        if (evaluate->parsed()) {
            corn::LoadedCheckpoint probe = corn::load_checkpoint(eval_checkpoint);
            const int k = eval_k > 0 ? eval_k : probe.model.config().num_ranks;
            const corn::Dataset dataset = load_and_report(eval_data, k);
            std::vector<std::size_t> manifest;
            const bool restricted = !eval_indices.empty();
            if (restricted) manifest = corn::read_index_manifest(eval_indices);
            const corn::EvalResult result = corn::evaluate_checkpoint(
                eval_checkpoint, dataset, restricted ? &manifest : nullptr);
            std::cout.precision(17);
            std::cout << "examples " << result.count << "\n"
                      << "mae " << result.mae << "\n"
                      << "rmse " << result.rmse << "\n";
            return 0;
        }
        if (synth->parsed()) {
            const corn::Dataset dataset =
                corn::synth_ordinal(synth_n, synth_d, synth_k, synth_noise, synth_seed);
            corn::write_csv(dataset, synth_out);
            std::cerr << "wrote " << dataset.size() << " rows to " << synth_out << '\n';
            return 0;
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 2;
    }
    return 0;
}
