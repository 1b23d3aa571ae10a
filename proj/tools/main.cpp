#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sentinel/cli.hpp"
#include "sentinel/util.hpp"

using namespace sentinel;

int main(int argc, char** argv) {
    CLI::App app{"netlist-sentinel: explainable gate-level hardware-trojan triage"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --config after the subcommand name

    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON run config (fallback: $NETLIST_SENTINEL_CONFIG)");

    // synth
    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "generate labeled synthetic trojan netlists");
    c_synth->add_option("--out", synth.out_dir, "output directory")->required();
    c_synth->add_option("--count", synth.count, "number of netlists");
    c_synth->add_option("--seed", synth.seed, "seed of the first netlist");
    c_synth->add_option("--gates", synth.gates, "benign host gate count");
    c_synth->add_option("--trigger-width", synth.trigger_width, "AND-trigger fanin (2..64)");
    c_synth->add_option("--payload", synth.payload, "mux | xor | alternate");

    // extract
    std::vector<std::string> extract_files;
    std::string extract_out = "features.csv";
    auto* c_extract = app.add_subcommand("extract", "parse netlists and emit the feature CSV");
    c_extract->add_option("files", extract_files, "netlist files")->required();
    c_extract->add_option("--out", extract_out, "output CSV path");

    // split
    std::string split_csv, split_out = ".";
    uint64_t split_seed = 0;
    bool split_seed_set = false;
    double split_fraction = 0.0;
    bool split_fraction_set = false;
    auto* c_split = app.add_subcommand("split", "seeded train/test split of a feature CSV");
    c_split->add_option("csv", split_csv, "combined feature CSV")->required();
    c_split->add_option("--out", split_out, "output directory");
    c_split->add_option("--seed", split_seed, "split seed (overrides config)")
        ->each([&](const std::string&) { split_seed_set = true; });
    c_split->add_option("--fraction", split_fraction, "test fraction (overrides config)")
        ->each([&](const std::string&) { split_fraction_set = true; });

    // train
    std::string train_csv, train_out = ".", train_arch = "both";
    auto* c_train = app.add_subcommand("train", "train the explainable architectures");
    c_train->add_option("csv", train_csv, "training feature CSV")->required();
    c_train->add_option("--out", train_out, "artifact directory");
    c_train->add_option("--arch", train_arch, "prop | case | both");

    // explain
    std::string explain_dir, explain_arch = "both", explain_out;
    std::string explain_sample, explain_csv;
    int explain_row = 0;
    double explain_threshold = -1.0;
    int explain_k = 0;
    auto* c_explain = app.add_subcommand("explain", "explain one sample against trained models");
    c_explain->add_option("artifacts", explain_dir, "artifact directory")->required();
    c_explain->add_option("--arch", explain_arch, "prop | case | both");
    c_explain->add_option("--sample", explain_sample, "five integers: LGFi,FFi,FFo,PI,PO");
    c_explain->add_option("--csv", explain_csv, "feature CSV to pick the sample from");
    c_explain->add_option("--row", explain_row, "1-based data row in --csv");
    c_explain->add_option("--threshold", explain_threshold, "vote registration threshold");
    c_explain->add_option("--k", explain_k, "nearest distinct keys for the case architecture");
    c_explain->add_option("--out", explain_out, "also write report files here");

    // eval
    std::string eval_dir, eval_csv, eval_arch = "both", eval_out;
    int eval_k = 0;
    auto* c_eval = app.add_subcommand("eval", "evaluate trained models on a test CSV");
    c_eval->add_option("artifacts", eval_dir, "artifact directory")->required();
    c_eval->add_option("csv", eval_csv, "test feature CSV")->required();
    c_eval->add_option("--arch", eval_arch, "prop | case | both");
    c_eval->add_option("--k", eval_k, "nearest distinct keys for the case architecture");
    c_eval->add_option("--out", eval_out, "also write report files here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        RunConfig cfg;
        if (config_path.empty()) {
            if (const char* env = std::getenv("NETLIST_SENTINEL_CONFIG")) config_path = env;
        }
        if (!config_path.empty()) cfg = RunConfig::load(config_path);

        if (*c_synth) return cmd_synth(synth);
        if (*c_extract) return cmd_extract(extract_files, cfg, extract_out);
        if (*c_split) {
            if (split_seed_set) cfg.split_seed = split_seed;
            if (split_fraction_set) cfg.split_fraction = split_fraction;
            return cmd_split(split_csv, cfg, split_out);
        }
        if (*c_train) return cmd_train(train_csv, cfg, arch_from_name(train_arch), train_out);
        if (*c_explain) {
            if (explain_threshold >= 0.0) cfg.prop_threshold = explain_threshold;
            if (explain_k > 0) cfg.case_k = explain_k;
            SampleSelector sel;
            if (!explain_sample.empty()) sel.inline_sample = parse_sample(explain_sample);
            sel.csv_path = explain_csv;
            sel.row = explain_row;
            return cmd_explain(explain_dir, sel, cfg, arch_from_name(explain_arch), explain_out);
        }
        if (*c_eval) {
            if (eval_k > 0) cfg.case_k = eval_k;
            return cmd_eval(eval_dir, eval_csv, cfg, arch_from_name(eval_arch), eval_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
