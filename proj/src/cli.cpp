#include "sentinel/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sentinel/casexai.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/netlist.hpp"
#include "sentinel/propxai.hpp"
#include "sentinel/util.hpp"

namespace fs = std::filesystem;

namespace sentinel {

namespace {

std::string ie_filename(int id) {
    std::ostringstream s;
    s << "ie_" << std::setw(2) << std::setfill('0') << id << ".json";
    return s.str();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

EnsembleConfig ensemble_config(const RunConfig& cfg) {
    EnsembleConfig ec;
    ec.C_grid = cfg.C_grid;
    ec.gamma_grid = cfg.gamma_grid;
    ec.folds = cfg.folds;
    ec.metric = cfg.prop_metric;
    ec.train_options = cfg.train_options();
    ec.threads = cfg.threads;
    return ec;
}

std::vector<double> resolved_gamma_grid(const RunConfig& cfg, int dims) {
    if (!cfg.gamma_grid.empty()) return cfg.gamma_grid;
    return {0.01, 0.1, 1.0 / dims, 1.0, 10.0};
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.cell_library_path = j.value("cell_library", c.cell_library_path);
        if (j.contains("label_patterns"))
            c.label_patterns = j.at("label_patterns").get<std::vector<std::string>>();
        c.feature_cap = j.value("feature_cap", c.feature_cap);
        if (j.contains("clock_pins"))
            c.clock_pins = j.at("clock_pins").get<std::vector<std::string>>();
        if (j.contains("split")) {
            c.split_fraction = j.at("split").value("fraction", c.split_fraction);
            c.split_seed = j.at("split").value("seed", c.split_seed);
        }
        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            if (s.contains("C_grid")) c.C_grid = s.at("C_grid").get<std::vector<double>>();
            if (s.contains("gamma_grid"))
                c.gamma_grid = s.at("gamma_grid").get<std::vector<double>>();
            c.folds = s.value("folds", c.folds);
            c.svm_tol = s.value("tol", c.svm_tol);
            c.max_iter = s.value("max_iter", c.max_iter);
        }
        if (j.contains("propxai")) {
            const auto& p = j.at("propxai");
            if (p.contains("metric")) c.prop_metric = metric_from_name(p.at("metric"));
            c.prop_threshold = p.value("threshold", c.prop_threshold);
        }
        if (j.contains("casexai")) c.case_k = j.at("casexai").value("k", c.case_k);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed config: ") + e.what());
    }
    if (c.feature_cap < 1) throw DataError("config: feature_cap must be positive");
    if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
        throw DataError("config: split.fraction must be in (0, 1)");
    if (!(c.prop_threshold >= 0.0 && c.prop_threshold <= 1.0))
        throw DataError("config: propxai.threshold must be in [0, 1]");
    if (c.case_k < 1) throw DataError("config: casexai.k must be >= 1");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{
        {"cell_library", cell_library_path},
        {"label_patterns", label_patterns},
        {"feature_cap", feature_cap},
        {"clock_pins", clock_pins},
        {"split", {{"fraction", split_fraction}, {"seed", split_seed}}},
        {"svm",
         {{"C_grid", C_grid},
          {"gamma_grid", gamma_grid},
          {"folds", folds},
          {"tol", svm_tol},
          {"max_iter", max_iter}}},
        {"propxai", {{"metric", metric_name(prop_metric)}, {"threshold", prop_threshold}}},
        {"casexai", {{"k", case_k}}},
        {"threads", threads}};
}

CellLibrary RunConfig::load_library() const {
    if (cell_library_path.empty()) return CellLibrary::builtin();
    return CellLibrary::from_json_file(cell_library_path);
}

FeatureConfig RunConfig::feature_config() const {
    FeatureConfig fc;
    fc.cap = feature_cap;
    fc.excluded_ff_pins = clock_pins;
    return fc;
}

TrainOptions RunConfig::train_options() const {
    TrainOptions t;
    t.tol = svm_tol;
    t.max_iter = max_iter;
    return t;
}

Arch arch_from_name(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "prop") return Arch::prop;
    if (n == "case") return Arch::kase;
    if (n == "both") return Arch::both;
    throw UsageError("unknown architecture '" + name + "' (expected prop, case, or both)");
}

FeatureVector parse_sample(const std::string& csv_five_ints) {
    auto parts = split(csv_five_ints, ',');
    if (parts.size() != kNumFeatures)
        throw UsageError("sample must be five comma-separated integers (LGFi,FFi,FFo,PI,PO)");
    std::array<int, kNumFeatures> a{};
    for (int i = 0; i < kNumFeatures; ++i) {
        try {
            a[i] = std::stoi(trim(parts[i]));
        } catch (const std::exception&) {
            throw UsageError("bad sample component '" + parts[i] + "'");
        }
        if (a[i] < 0) throw UsageError("sample components must be non-negative");
    }
    return FeatureVector::from_array(a);
}

std::pair<std::string, std::string> part_version_from_path(const std::string& path) {
    std::string stem = fs::path(path).stem().string();
    auto dash = stem.rfind('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == stem.size())
        return {stem, "NA"};
    return {stem.substr(0, dash), stem.substr(dash + 1)};
}

int cmd_synth(const SynthArgs& args) {
    if (args.count < 1) throw UsageError("synth: count must be >= 1");
    ensure_dir(args.out_dir);
    for (int i = 0; i < args.count; ++i) {
        TrojanSpec spec;
        spec.seed = args.seed + static_cast<uint64_t>(i);
        spec.host_gates = args.gates;
        spec.trigger_width = args.trigger_width;
        if (args.payload == "alternate")
            spec.payload = i % 2 == 0 ? PayloadKind::mux_leak : PayloadKind::xor_corrupt;
        else
            spec.payload = payload_from_name(args.payload);
        GeneratedNetlist g = generate(spec);
        fs::path base = fs::path(args.out_dir) / ("synth-s" + std::to_string(spec.seed));
        write_file(base.string() + ".v", g.verilog);
        write_file(base.string() + ".manifest.json", g.manifest.to_json().dump(2) + "\n");
        std::cout << base.string() << ".v: " << g.manifest.gate_count << " gates, "
                  << g.manifest.trojan_nets.size() << " trojan nets\n";
    }
    return kExitOk;
}

int cmd_extract(const std::vector<std::string>& files, const RunConfig& cfg,
                const std::string& out_csv) {
    if (files.empty()) throw UsageError("extract: no netlist files given");
    CellLibrary lib = cfg.load_library();
    Dataset combined;
    for (const auto& file : files) {
        auto [part, version] = part_version_from_path(file);
        NetlistIR ir = parse_netlist_file(file, lib);
        for (const auto& w : ir.warnings) std::cerr << file << ": warning: " << w << "\n";
        Dataset one;
        one.records = extract_all(ir, part, version, cfg.label_patterns, cfg.feature_config());
        one.source_manifest.push_back(SourceEntry{part, version, file});
        size_t trojans = one.count(Label::trojan);
        std::cout << file << ": " << one.records.size() << " nets, " << trojans << " trojan\n";
        combined.append(one);
    }
    if (!out_csv.empty()) {
        fs::path parent = fs::path(out_csv).parent_path();
        if (!parent.empty()) ensure_dir(parent.string());
        write_csv_file(combined, out_csv);
        std::cout << "wrote " << combined.records.size() << " records to " << out_csv << "\n";
    }
    return kExitOk;
}

int cmd_split(const std::string& csv, const RunConfig& cfg, const std::string& out_dir) {
    Dataset ds = read_csv_file(csv);
    SplitResult s = split(ds, cfg.split_fraction, cfg.split_seed);
    ensure_dir(out_dir);
    fs::path dir(out_dir);
    write_csv_file(s.train, (dir / "train.csv").string());
    write_csv_file(s.test, (dir / "test.csv").string());
    write_file((dir / "split_manifest.json").string(), split_manifest(s).dump(2) + "\n");
    std::cout << "split " << ds.records.size() << " records: " << s.train.records.size()
              << " train / " << s.test.records.size() << " test (fraction "
              << cfg.split_fraction << ", seed " << cfg.split_seed << ")\n";
    return kExitOk;
}

int cmd_train(const std::string& csv, const RunConfig& cfg, Arch arch,
              const std::string& out_dir) {
    Dataset train = read_csv_file(csv);
    if (train.count(Label::trojan) == 0 || train.count(Label::non_trojan) == 0)
        throw DataError("training data must contain both classes");
    ensure_dir(out_dir);
    fs::path dir(out_dir);

    double b_t = balance(train, Label::trojan);
    std::cout << "training records: " << train.records.size() << " ("
              << train.count(Label::trojan) << " trojan / " << train.count(Label::non_trojan)
              << " non-trojan), b(trojan) = " << format_double(b_t, 1) << "\n";

    bool all_converged = true;
    if (arch == Arch::prop || arch == Arch::both) {
        auto [ensemble, kb] = train_ensemble(train, ensemble_config(cfg));
        for (int id = 1; id <= kNumProperties; ++id)
            save_svm(ensemble.engines[id - 1], (dir / ie_filename(id)).string());
        save_kb(kb, (dir / "kb.json").string());
        std::cout << "\nID  Features                  X     effectiveness (" +
                         metric_name(kb.metric) + ")\n";
        for (const auto& p : enumerate_properties()) {
            std::ostringstream line;
            line << std::left << std::setw(4) << p.id << std::setw(26)
                 << join(p.features.names(), ", ") << std::setw(6)
                 << format_double(explainability(p), 2) << format_double(kb.weight(p.id), 4);
            std::cout << line.str() << "\n";
            if (!ensemble.engines[p.id - 1].converged) all_converged = false;
        }
    }
    if (arch == Arch::kase || arch == Arch::both) {
        KernelParams weights;
        weights.weight_trojan = b_t;
        KernelParams best =
            grid_search(train, FeatureMask::all(), cfg.C_grid,
                        resolved_gamma_grid(cfg, kNumFeatures), cfg.folds, cfg.prop_metric,
                        weights, cfg.train_options());
        std::vector<std::vector<double>> X;
        std::vector<Label> y;
        for (const auto& r : train.records) {
            X.push_back(FeatureMask::all().project(r.features));
            y.push_back(r.label);
        }
        TrainedSvm model = train_svm(X, y, best, cfg.train_options());
        model.mask = FeatureMask::all();
        if (!model.converged) all_converged = false;
        save_svm(model, (dir / "case_svm.json").string());
        TrainingIndex ti = build_index(train);
        save_index(ti, (dir / "index.json").string());
        std::cout << "case model: C = " << best.C << ", gamma = " << best.gamma << ", "
                  << model.support_vectors.size() << " support vectors; index keys: "
                  << ti.entries.size() << "\n";
    }
    if (!all_converged) {
        std::cerr << "warning: at least one SVM hit the iteration limit before convergence\n";
        return kExitConvergence;
    }
    return kExitOk;
}

namespace {

FeatureVector select_sample(const SampleSelector& sel) {
    if (sel.inline_sample) return *sel.inline_sample;
    if (sel.csv_path.empty())
        throw UsageError("explain: give --sample LGFi,FFi,FFo,PI,PO or --csv FILE --row N");
    Dataset ds = read_csv_file(sel.csv_path);
    if (sel.row < 1 || sel.row > static_cast<int>(ds.records.size()))
        throw UsageError("explain: --row out of range (1.." +
                         std::to_string(ds.records.size()) + ")");
    return ds.records[sel.row - 1].features;
}

}  // namespace

int cmd_explain(const std::string& artifact_dir, const SampleSelector& sel, const RunConfig& cfg,
                Arch arch, const std::string& out_dir) {
    FeatureVector x = select_sample(sel);
    fs::path dir(artifact_dir);
    if (!out_dir.empty()) ensure_dir(out_dir);

    std::cout << "sample: <" << x.lgfi << ", " << x.ffi << ", " << x.ffo << ", " << x.pi << ", "
              << x.po << ">\n\n";
    if (arch == Arch::prop || arch == Arch::both) {
        PropertyEnsemble ensemble;
        for (int id = 1; id <= kNumProperties; ++id)
            ensemble.engines.push_back(load_svm((dir / ie_filename(id)).string()));
        KnowledgeBase kb = load_kb((dir / "kb.json").string());
        Verdict v = decide(ensemble, kb, x, cfg.prop_threshold);
        Rationale r = compose_rationale(v, kb);
        std::cout << "== property-based architecture ==\n" << r.text << "\n";
        if (!out_dir.empty()) {
            write_file((fs::path(out_dir) / "rationale.txt").string(), r.text);
            write_file((fs::path(out_dir) / "rationale.json").string(), r.json.dump(2) + "\n");
        }
    }
    if (arch == Arch::kase || arch == Arch::both) {
        TrainedSvm model = load_svm((dir / "case_svm.json").string());
        TrainingIndex ti = load_index((dir / "index.json").string());
        CaseExplanation ce = explain_case(model, ti, x, cfg.case_k);
        std::string text = render_case_report(ce);
        std::cout << "== case-based architecture ==\n" << text << "\n";
        if (!out_dir.empty()) {
            write_file((fs::path(out_dir) / "case_explanation.txt").string(), text);
            write_file((fs::path(out_dir) / "case_explanation.json").string(),
                       case_explanation_json(ce).dump(2) + "\n");
        }
    }
    return kExitOk;
}

int cmd_eval(const std::string& artifact_dir, const std::string& test_csv, const RunConfig& cfg,
             Arch arch, const std::string& out_dir) {
    Dataset test = read_csv_file(test_csv);
    if (test.records.empty()) throw DataError("eval: empty test set");
    fs::path dir(artifact_dir);

    nlohmann::json report;
    report["config"] = cfg.to_json();
    report["records"] = test.records.size();
    std::ostringstream text;
    text << "evaluated " << test.records.size() << " records ("
         << test.count(Label::trojan) << " trojan)\n";

    std::vector<Label> prop_pred, case_pred;
    bool have_prop = arch == Arch::prop || arch == Arch::both;
    bool have_case = arch == Arch::kase || arch == Arch::both;

    auto describe = [&text, &report](const std::string& name, const Confusion& c) {
        text << name << ": accuracy " << format_double(c.accuracy(), 4) << "\n"
             << "  confusion  tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn
             << " fn=" << c.fn << "\n"
             << "  trojan     precision " << format_double(c.precision(Label::trojan), 4)
             << "  recall " << format_double(c.recall(Label::trojan), 4) << "\n"
             << "  non-trojan precision " << format_double(c.precision(Label::non_trojan), 4)
             << "  recall " << format_double(c.recall(Label::non_trojan), 4) << "\n";
        report[name] = {{"accuracy", c.accuracy()},
                        {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}},
                        {"precision",
                         {{"t", c.precision(Label::trojan)}, {"n", c.precision(Label::non_trojan)}}},
                        {"recall",
                         {{"t", c.recall(Label::trojan)}, {"n", c.recall(Label::non_trojan)}}}};
    };

    if (have_prop) {
        PropertyEnsemble ensemble;
        for (int id = 1; id <= kNumProperties; ++id)
            ensemble.engines.push_back(load_svm((dir / ie_filename(id)).string()));
        KnowledgeBase kb = load_kb((dir / "kb.json").string());
        Confusion c;
        double expl_sum = 0.0;
        for (const auto& r : test.records) {
            Verdict v = decide(ensemble, kb, r.features, cfg.prop_threshold);
            prop_pred.push_back(v.decision);
            c.add(v.decision, r.label);
            expl_sum += v.explainability.of(v.decision);
        }
        describe("prop", c);
        double mean_expl = expl_sum / static_cast<double>(test.records.size());
        text << "  mean decision explainability " << format_double(mean_expl, 4) << "\n";
        report["prop"]["mean_decision_explainability"] = mean_expl;
    }
    if (have_case) {
        TrainedSvm model = load_svm((dir / "case_svm.json").string());
        TrainingIndex ti = load_index((dir / "index.json").string());
        Confusion c;
        size_t agree = 0;
        for (const auto& r : test.records) {
            CaseExplanation ce = explain_case(model, ti, r.features, cfg.case_k);
            case_pred.push_back(ce.prediction);
            c.add(ce.prediction, r.label);
            if (ce.agrees) ++agree;
        }
        describe("case", c);
        double rate = static_cast<double>(agree) / static_cast<double>(test.records.size());
        text << "  KNN agreement rate " << format_double(rate, 4) << "\n";
        report["case"]["knn_agreement_rate"] = rate;
    }
    if (have_prop && have_case) {
        size_t same = 0;
        for (size_t i = 0; i < prop_pred.size(); ++i)
            if (prop_pred[i] == case_pred[i]) ++same;
        double rate = static_cast<double>(same) / static_cast<double>(prop_pred.size());
        text << "prop-vs-case decision agreement " << format_double(rate, 4) << "\n";
        report["prop_case_agreement"] = rate;
    }

    std::cout << text.str();
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_file((fs::path(out_dir) / "eval_report.txt").string(), text.str());
        write_file((fs::path(out_dir) / "eval_report.json").string(), report.dump(2) + "\n");
    }
    return kExitOk;
}

}  // namespace sentinel
