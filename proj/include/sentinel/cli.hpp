#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/featex.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/svm.hpp"
#include "sentinel/synthgen.hpp"

namespace sentinel {

// Exit-code contract: 0 success, 1 usage error, 2 data error,
// 3 convergence warning (artifacts are still written).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitConvergence = 3;

struct RunConfig {
    std::string cell_library_path;  // empty: builtin library
    std::vector<std::string> label_patterns{"troj"};
    int feature_cap = 64;
    std::vector<std::string> clock_pins = FeatureConfig::default_excluded_ff_pins();
    double split_fraction = 0.2;
    uint64_t split_seed = 1;
    std::vector<double> C_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<double> gamma_grid;  // empty: {0.01, 0.1, 1/d, 1, 10}
    int folds = 5;
    double svm_tol = 1e-3;
    long max_iter = 1'000'000;
    Metric prop_metric = Metric::mcc;
    double prop_threshold = 0.05;
    int case_k = 4;
    int threads = 0;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;  // echoed into reports

    CellLibrary load_library() const;
    FeatureConfig feature_config() const;
    TrainOptions train_options() const;
};

enum class Arch { prop, kase, both };
Arch arch_from_name(const std::string& name);

struct SynthArgs {
    std::string out_dir;
    int count = 1;
    uint64_t seed = 1;
    int gates = 150;
    int trigger_width = 8;
    std::string payload = "alternate";  // mux | xor | alternate
};

int cmd_synth(const SynthArgs& args);
int cmd_extract(const std::vector<std::string>& files, const RunConfig& cfg,
                const std::string& out_csv);
int cmd_split(const std::string& csv, const RunConfig& cfg, const std::string& out_dir);
int cmd_train(const std::string& csv, const RunConfig& cfg, Arch arch,
              const std::string& out_dir);

struct SampleSelector {
    std::optional<FeatureVector> inline_sample;  // --sample a,b,c,d,e
    std::string csv_path;                        // --csv + --row
    int row = 0;                                 // 1-based data row
};

int cmd_explain(const std::string& artifact_dir, const SampleSelector& sel, const RunConfig& cfg,
                Arch arch, const std::string& out_dir);
int cmd_eval(const std::string& artifact_dir, const std::string& test_csv, const RunConfig& cfg,
             Arch arch, const std::string& out_dir);

FeatureVector parse_sample(const std::string& csv_five_ints);

// "RS232-T1000.v" -> ("RS232", "T1000"); no dash -> (stem, "NA")
std::pair<std::string, std::string> part_version_from_path(const std::string& path);

}  // namespace sentinel
