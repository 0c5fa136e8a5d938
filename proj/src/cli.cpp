#include "tssd/cli.hpp"

#include "tssd/error.hpp"
#include "tssd/metrics.hpp"
#include "tssd/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace tssd {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw InvalidSpec(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    return v;
}

std::uint64_t to_u64(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidSpec(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

void require(bool ok, std::string_view key, const char* rule) {
    if (!ok) throw InvalidSpec(std::string(key) + " must be " + rule);
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<json(const RunConfig&)> get;
};

template <class Getter>
Key count_key(std::string name, Getter field, std::size_t min) {
    return {name,
            [name, field, min](RunConfig& c, std::string_view v) {
                const auto n = to_u64(name, v);
                if (n < min) throw InvalidSpec(name + " must be at least " + std::to_string(min));
                field(c) = static_cast<std::size_t>(n);
            },
            [field](const RunConfig& c) { return json(field(c)); }};
}

template <class Getter>
Key real_key(std::string name, Getter field, std::function<bool(double)> ok, const char* rule) {
    return {name,
            [name, field, ok, rule](RunConfig& c, std::string_view v) {
                const double x = to_double(name, v);
                require(ok(x), name, rule);
                field(c) = x;
            },
            [field](const RunConfig& c) { return json(field(c)); }};
}

template <class Getter>
Key strategy_key(std::string name, Getter field) {
    return {name, [field](RunConfig& c, std::string_view v) { field(c) = ThresholdStrategy::parse(trim(v)); },
            [field](const RunConfig& c) { return json(field(c).to_string()); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        auto positive = [](double x) { return x > 0.0; };
        auto non_negative = [](double x) { return x >= 0.0; };
        std::vector<Key> k;
        k.push_back(count_key("k", [](auto& c) -> auto& { return c.synthetic.num_classes; }, 1));
        k.push_back(count_key("d", [](auto& c) -> auto& { return c.synthetic.feature_dim; }, 1));
        k.push_back(count_key("n", [](auto& c) -> auto& { return c.synthetic.num_samples; }, 1));
        k.push_back(real_key("spread", [](auto& c) -> auto& { return c.synthetic.cluster_spread; },
                             positive, "positive"));
        k.push_back(real_key("sharpness", [](auto& c) -> auto& { return c.synthetic.logit_sharpness; },
                             positive, "positive"));
        k.push_back(real_key("jitter", [](auto& c) -> auto& { return c.synthetic.logit_jitter; },
                             non_negative, "non-negative"));
        k.push_back({"noise", [](RunConfig& c, std::string_view v) { c.noise = parse_noise(v); },
                     [](const RunConfig& c) { return json(format_noise(c.noise)); }});
        k.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = to_u64("seed", v); },
                     [](const RunConfig& c) { return json(c.seed); }});
        k.push_back(real_key("test_fraction", [](auto& c) -> auto& { return c.test_fraction; },
                             [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)"));
        k.push_back(count_key("gmm_max_iter", [](auto& c) -> auto& { return c.selection.gmm.max_iter; }, 1));
        k.push_back(real_key("gmm_tol", [](auto& c) -> auto& { return c.selection.gmm.tol; }, positive,
                             "positive"));
        k.push_back(real_key("gmm_variance_floor",
                             [](auto& c) -> auto& { return c.selection.gmm.variance_floor; }, positive,
                             "positive"));
        k.push_back(count_key("gmm_min_fit_size",
                              [](auto& c) -> auto& { return c.selection.gmm.min_fit_size; }, 2));
        k.push_back(strategy_key("t1", [](auto& c) -> auto& { return c.selection.t1; }));
        k.push_back(strategy_key("t2", [](auto& c) -> auto& { return c.selection.t2; }));
        k.push_back(strategy_key("t3", [](auto& c) -> auto& { return c.selection.t3; }));
        k.push_back(strategy_key("t4", [](auto& c) -> auto& { return c.selection.t4; }));
        k.push_back(real_key("meta_lr", [](auto& c) -> auto& { return c.selection.meta.lr; }, positive,
                             "positive"));
        k.push_back(count_key("meta_epochs", [](auto& c) -> auto& { return c.selection.meta.epochs; }, 1));
        k.push_back(count_key("meta_batch_size",
                              [](auto& c) -> auto& { return c.selection.meta.batch_size; }, 1));
        k.push_back(count_key("meta_hidden", [](auto& c) -> auto& { return c.selection.meta.hidden; }, 1));
        k.push_back(count_key("meta_patience",
                              [](auto& c) -> auto& { return c.selection.meta.patience; }, 1));
        k.push_back(real_key("meta_min_delta", [](auto& c) -> auto& { return c.selection.meta.min_delta; },
                             non_negative, "non-negative"));
        k.push_back(count_key("warmup_epochs", [](auto& c) -> auto& { return c.train.warmup_epochs; }, 0));
        k.push_back(count_key("rounds", [](auto& c) -> auto& { return c.train.rounds; }, 0));
        k.push_back(real_key("lr", [](auto& c) -> auto& { return c.train.lr; }, positive, "positive"));
        k.push_back(real_key("momentum", [](auto& c) -> auto& { return c.train.momentum; },
                             [](double x) { return x >= 0.0 && x < 1.0; }, "in [0,1)"));
        k.push_back(real_key("lambda_u", [](auto& c) -> auto& { return c.train.lambda_u; }, non_negative,
                             "non-negative"));
        k.push_back(real_key("lambda_r", [](auto& c) -> auto& { return c.train.lambda_r; }, non_negative,
                             "non-negative"));
        k.push_back(count_key("lambda_u_rampup",
                              [](auto& c) -> auto& { return c.train.lambda_u_rampup; }, 0));
        k.push_back(count_key("ensemble_size", [](auto& c) -> auto& { return c.train.ensemble_size; }, 1));
        k.push_back(count_key("hidden", [](auto& c) -> auto& { return c.train.hidden; }, 1));
        k.push_back(count_key("batch_size", [](auto& c) -> auto& { return c.train.batch_size; }, 1));
        k.push_back({"output", [](RunConfig& c, std::string_view v) { c.output = std::string(trim(v)); },
                     [](const RunConfig& c) { return json(c.output.generic_string()); }});
        return k;
    }();
    return table;
}

json selection_json(const SelectionReport& r) {
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}, {"tp_rate", r.tp_rate},
            {"tn_rate", r.tn_rate}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

std::string report_text(const json& report) {
    validate_report(report);
    return report.dump(2) + "\n";
}

}  // namespace

RunConfig default_train_config() {
    RunConfig c;
    c.selection.t1 = ThresholdStrategy::percentile(0.4);
    c.selection.t2 = ThresholdStrategy::percentile(0.4);
    return c;
}

NoiseSpec parse_noise(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw InvalidSpec("noise must look like sym:0.4 or asym:0.2");
    const auto kind = text.substr(0, colon);
    NoiseSpec spec;
    if (kind == "sym")
        spec.kind = NoiseKind::Symmetric;
    else if (kind == "asym")
        spec.kind = NoiseKind::Asymmetric;
    else
        throw InvalidSpec("unknown noise kind '" + std::string(kind) + "'");
    spec.rate = to_double("noise", text.substr(colon + 1));
    if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) throw InvalidSpec("noise rate must be in [0,1]");
    return spec;
}

std::string format_noise(const NoiseSpec& noise) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, noise.rate);
    return (noise.kind == NoiseKind::Symmetric ? "sym:" : "asym:") + std::string(buf, ptr);
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
    key = trim(key);
    for (const Key& k : keys()) {
        if (k.name == key) {
            k.set(config, value);
            return;
        }
    }
    throw InvalidSpec("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw InvalidSpec("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
        } catch (const InvalidSpec& e) {
            throw InvalidSpec("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open config file " + path.string());
    apply_config_text(config, in);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const Key& k : keys()) out.push_back(k.name);
        return out;
    }();
    return names;
}

json config_to_json(const RunConfig& config) {
    json out = json::object();
    for (const Key& k : keys()) out[k.name] = k.get(config);
    return out;
}

RunConfig resolve_seeds(const RunConfig& config) {
    RunConfig c = config;
    c.synthetic.seed = derive_seed(config.seed, "generate/data");
    c.noise.seed = derive_seed(config.seed, "generate/noise");
    c.selection.gmm.seed = derive_seed(config.seed, "gmm");
    c.selection.meta.seed = derive_seed(config.seed, "distill/meta");
    c.train.seed = derive_seed(config.seed, "train");
    return c;
}

Split train_split(const RunConfig& config, std::size_t n) {
    return holdout_split(n, config.test_fraction, derive_seed(config.seed, "train/split"));
}

json sizes_json(const Partition& p) {
    return {{"S_p", p.positive.size()}, {"S_n", p.negative.size()}, {"S_u", p.uncertain.size()},
            {"C", p.clean().size()},    {"U", p.noisy().size()},    {"DROPPED", p.dropped.size()}};
}

DistillRun run_distill(const RunConfig& config, const Dataset& dataset) {
    const RunConfig c = resolve_seeds(config);
    const auto clusters = partition_by_label(dataset);
    ScoreTable table = score_dataset(dataset, clusters);
    SelectionOutcome outcome = select_samples(table, clusters, c.selection);

    DistillRun run;
    run.report["config"] = config_to_json(config);
    run.report["sizes"] = sizes_json(outcome.partition);
    if (const auto truth = dataset.clean_mask())
        run.report["selection"] = selection_json(selection_metrics(outcome.partition.clean(), *truth));
    run.report["per_round"] = json::array();
    run.report["fallbacks"] = outcome.fallbacks;
    run.partition = std::move(outcome.partition);
    return run;
}

TrainRun run_train(const RunConfig& config, const Dataset& dataset) {
    const RunConfig c = resolve_seeds(config);
    const Split split = train_split(config, dataset.size());
    const Dataset train = dataset.subset(split.train);
    const Dataset test = dataset.subset(split.test);
    if (train.empty()) throw InvalidSpec("nothing left to train on after the holdout split");
    const bool scored_test = !test.empty() && test.has_truth();
    const auto truth = train.clean_mask();

    TrainRun run;
    json report;
    report["config"] = config_to_json(config);
    json fallbacks = json::array();
    json per_round = json::array();
    json acc = json::object();

    Ensemble ensemble = warmup(make_ensemble(train.feature_dim(), train.num_classes(), c.train), train,
                               c.train.warmup_epochs, c.train.lr, c.train.seed, c.train.momentum,
                               c.train.batch_size);
    if (scored_test) acc["warmup"] = accuracy(ensemble, test);

    Partition last;
    if (c.train.rounds == 0) {
        const auto clusters = partition_by_label(train);
        ScoreTable table = ensemble_scores(ensemble, train, clusters);
        SelectionConfig sel = c.selection;
        sel.meta.seed = derive_seed(c.train.seed, "round/meta", 0);
        SelectionOutcome outcome = select_samples(table, clusters, sel);
        for (const auto& f : outcome.fallbacks) fallbacks.push_back(f);
        run.meta_net = std::move(outcome.meta_net);
        last = std::move(outcome.partition);
    }
    for (std::size_t r = 0; r < c.train.rounds; ++r) {
        RoundResult round = distill_round(ensemble, train, c.selection, c.train, r);
        ensemble = std::move(round.ensemble);
        json entry;
        entry["round"] = r + 1;
        entry["sizes"] = sizes_json(round.partition);
        if (truth) entry["selection"] = selection_json(selection_metrics(round.partition.clean(), *truth));
        if (scored_test) entry["test_accuracy"] = accuracy(ensemble, test);
        per_round.push_back(std::move(entry));
        for (const auto& f : round.fallbacks) fallbacks.push_back("round " + std::to_string(r + 1) + ": " + f);
        run.meta_net = std::move(round.meta_net);
        last = std::move(round.partition);
    }
    if (scored_test && c.train.rounds > 0) {
        acc["final"] = accuracy(ensemble, test);
        acc["ce_baseline"] = accuracy(train_ce_baseline(train, c.train), test);
    }

    report["sizes"] = sizes_json(last);
    if (truth) report["selection"] = selection_json(selection_metrics(last.clean(), *truth));
    report["per_round"] = std::move(per_round);
    if (scored_test) report["accuracy"] = std::move(acc);
    report["fallbacks"] = std::move(fallbacks);

    const auto tags = partition_tags(last);
    for (std::size_t i = 0; i < tags.size(); ++i) run.tags.emplace_back(split.train[i], tags[i]);
    std::sort(run.tags.begin(), run.tags.end());
    run.ensemble = std::move(ensemble);
    run.report = std::move(report);
    return run;
}

json evaluate_partition(const std::vector<std::pair<SampleId, std::string>>& tags, const Dataset& truth) {
    if (tags.empty()) throw ParseError("partition file has no entries");
    std::vector<bool> seen(truth.size(), false);
    std::vector<bool> clean;
    std::vector<SampleId> selected;
    clean.reserve(tags.size());
    for (const auto& [id, tag] : tags) {
        if (id >= truth.size())
            throw IdMismatch("partition id " + std::to_string(id) + " is not in the truth table");
        if (seen[id]) throw IdMismatch("partition id " + std::to_string(id) + " appears twice");
        seen[id] = true;
        const Sample& s = truth[id];
        if (!s.true_label) throw IdMismatch("truth table has no true label for id " + std::to_string(id));
        if (tag == "P" || tag == "C") selected.push_back(clean.size());
        clean.push_back(s.noisy_label == *s.true_label);
    }
    const SelectionReport r = selection_metrics(selected, clean);
    json out = selection_json(r);
    out["tp"] = r.tp;
    out["fp"] = r.fp;
    out["tn"] = r.tn;
    out["fn"] = r.fn;
    out["selected"] = r.selected;
    out["total"] = r.total;
    return out;
}

namespace {
bool is_count(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}
}  // namespace

void validate_report(const json& report) {
    auto fail = [](const std::string& what) { throw InvalidSpec("report schema: " + what); };
    if (!report.is_object()) fail("top level must be an object");
    static const std::vector<std::string> allowed = {"config",   "sizes",    "selection",
                                                      "per_round", "accuracy", "fallbacks"};
    for (const auto& [key, value] : report.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail("unexpected key " + key);

    auto check_sizes = [&](const json& sizes, const std::string& where) {
        if (!sizes.is_object()) fail(where + " must be an object");
        for (const char* k : {"S_p", "S_n", "S_u", "C", "U", "DROPPED"})
            if (!sizes.contains(k) || !is_count(sizes[k])) fail(where + "." + k + " must be a count");
        if (sizes.size() != 6) fail(where + " has extra keys");
    };
    auto check_selection = [&](const json& sel, const std::string& where) {
        if (!sel.is_object()) fail(where + " must be an object");
        for (const char* k : {"precision", "recall", "f1", "tp_rate", "tn_rate"})
            if (!sel.contains(k) || !sel[k].is_number()) fail(where + "." + k + " must be a number");
        if (sel.size() != 5) fail(where + " has extra keys");
    };

    if (!report.contains("config") || !report["config"].is_object()) fail("config must be an object");
    for (const auto& key : config_keys())
        if (!report["config"].contains(key)) fail("config." + key + " missing");
    if (!report.contains("sizes")) fail("sizes missing");
    check_sizes(report["sizes"], "sizes");
    if (report.contains("selection")) check_selection(report["selection"], "selection");
    if (!report.contains("per_round") || !report["per_round"].is_array()) fail("per_round must be an array");
    for (const auto& entry : report["per_round"]) {
        if (!entry.is_object()) fail("per_round entries must be objects");
        if (!entry.contains("round") || !is_count(entry["round"])) fail("per_round.round must be a count");
        if (!entry.contains("sizes")) fail("per_round.sizes missing");
        check_sizes(entry["sizes"], "per_round.sizes");
        if (entry.contains("selection")) check_selection(entry["selection"], "per_round.selection");
        if (entry.contains("test_accuracy") && !entry["test_accuracy"].is_number())
            fail("per_round.test_accuracy must be a number");
    }
    if (report.contains("accuracy")) {
        const json& acc = report["accuracy"];
        if (!acc.is_object()) fail("accuracy must be an object");
        for (const auto& [key, value] : acc.items()) {
            if (key != "warmup" && key != "final" && key != "ce_baseline") fail("unexpected accuracy." + key);
            if (!value.is_number()) fail("accuracy." + key + " must be a number");
        }
    }
    if (!report.contains("fallbacks") || !report["fallbacks"].is_array()) fail("fallbacks must be an array");
    for (const auto& f : report["fallbacks"])
        if (!f.is_string()) fail("fallbacks entries must be strings");
}

namespace {

struct Overrides {
    std::string config_file;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;

    RunConfig build(RunConfig config = {}) const {
        if (!config_file.empty()) apply_config_file(config, config_file);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw InvalidSpec("--set expects key=value, got '" + s + "'");
            apply_setting(config, std::string_view(s).substr(0, eq), std::string_view(s).substr(eq + 1));
        }
        for (const auto& [k, v] : flags) apply_setting(config, k, v);
        return config;
    }
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_file, "Flat key = value config file");
    sub->add_option("--set", o.sets, "Override any config key (key=value, repeatable)");
}

void add_flag(CLI::App* sub, Overrides& o, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); }, help);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tags_text(const std::vector<std::pair<SampleId, std::string>>& tags) {
    std::string out;
    for (const auto& [id, tag] : tags) out += std::to_string(id) + ',' + tag + '\n';
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual-space sample selection for learning with noisy labels", "tssd"};
    app.require_subcommand(1);

    Overrides gen_o, dist_o, train_o;
    std::string gen_out, dist_in, train_in, eval_partition, eval_truth;

    auto* gen = app.add_subcommand("generate", "Write a synthetic benchmark as a sample table");
    add_common(gen, gen_o);
    add_flag(gen, gen_o, "--k", "k", "Number of classes");
    add_flag(gen, gen_o, "--d", "d", "Feature dimension");
    add_flag(gen, gen_o, "--n", "n", "Number of samples");
    add_flag(gen, gen_o, "--spread", "spread", "Cluster standard deviation");
    add_flag(gen, gen_o, "--noise", "noise", "Label noise, sym:RATE or asym:RATE");
    add_flag(gen, gen_o, "--seed", "seed", "Global seed");
    gen->add_option("-o,--output", gen_out, "Sample table to write")->required();

    auto* dist = app.add_subcommand("distill", "Score, divide and purify a sample table");
    add_common(dist, dist_o);
    dist->add_option("input", dist_in, "Sample table")->required();
    add_flag(dist, dist_o, "-o,--output", "output", "Output directory");
    add_flag(dist, dist_o, "--seed", "seed", "Global seed");
    for (const char* t : {"t1", "t2", "t3", "t4"})
        add_flag(dist, dist_o, std::string("--") + t, t, "Threshold strategy (fixed:T, noise_rate:P, percentile:P)");

    auto* trn = app.add_subcommand("train", "Warm up, then run rounds of selection and semi-supervised training");
    add_common(trn, train_o);
    trn->add_option("input", train_in, "Sample table")->required();
    add_flag(trn, train_o, "-o,--output", "output", "Output directory");
    add_flag(trn, train_o, "--seed", "seed", "Global seed");
    add_flag(trn, train_o, "--rounds", "rounds", "Distillation rounds");
    add_flag(trn, train_o, "--warmup-epochs", "warmup_epochs", "Plain cross-entropy epochs before selection");
    add_flag(trn, train_o, "--test-fraction", "test_fraction", "Held-out fraction for accuracy");
    for (const char* t : {"t1", "t2", "t3", "t4"})
        add_flag(trn, train_o, std::string("--") + t, t, "Threshold strategy (fixed:T, noise_rate:P, percentile:P)");

    auto* eval = app.add_subcommand("evaluate", "Score a partition file against a truth sample table");
    eval->add_option("partition", eval_partition, "Partition file (id,tag)")->required();
    eval->add_option("truth", eval_truth, "Sample table with true labels")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const RunConfig config = resolve_seeds(gen_o.build());
            const Dataset clean = generate_synthetic(config.synthetic);
            const Dataset data = inject_noise(clean, config.noise);
            std::ostringstream text;
            write_sample_table(data, text);
            if (const auto parent = std::filesystem::path(gen_out).parent_path(); !parent.empty())
                std::filesystem::create_directories(parent);
            write_text(gen_out, text.str());
            out << "wrote " << data.size() << " samples (K=" << data.num_classes() << ", D=" << data.feature_dim()
                << ", flip fraction " << data.flip_fraction() << ") to " << gen_out << '\n';
        } else if (dist->parsed()) {
            const RunConfig config = dist_o.build();
            const Dataset data = load_sample_table(dist_in);
            const DistillRun run = run_distill(config, data);
            std::filesystem::create_directories(config.output);
            const std::string report = report_text(run.report);
            std::ostringstream part;
            write_partition(run.partition, part);
            write_text(config.output / "partition.csv", part.str());
            write_text(config.output / "report.json", report);
            const json& s = run.report["sizes"];
            out << "S_p " << s["S_p"] << " S_n " << s["S_n"] << " S_u " << s["S_u"] << " C " << s["C"] << " U "
                << s["U"] << " DROPPED " << s["DROPPED"] << '\n';
        } else if (trn->parsed()) {
            const RunConfig config = train_o.build(default_train_config());
            const Dataset data = load_sample_table(train_in);
            const TrainRun run = run_train(config, data);
            std::filesystem::create_directories(config.output);
            const std::string report = report_text(run.report);
            write_text(config.output / "partition.csv", tags_text(run.tags));
            for (std::size_t m = 0; m < run.ensemble.size(); ++m) {
                std::ostringstream ck;
                save_classifier(run.ensemble[m], ck);
                write_text(config.output / ("classifier_" + std::to_string(m) + ".txt"), ck.str());
            }
            if (run.meta_net) {
                std::ostringstream ck;
                save_meta_net(*run.meta_net, ck);
                write_text(config.output / "meta_net.txt", ck.str());
            }
            write_text(config.output / "report.json", report);
            if (run.report.contains("accuracy")) out << "accuracy " << run.report["accuracy"].dump() << '\n';
        } else if (eval->parsed()) {
            std::istringstream part(read_file(eval_partition));
            const auto tags = read_partition_tags(part);
            const Dataset truth = load_sample_table(eval_truth);
            out << evaluate_partition(tags, truth).dump(2) << '\n';
        }
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InvalidSpec& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const ContractViolation& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace tssd
