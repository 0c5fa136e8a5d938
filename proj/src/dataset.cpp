#include "tssd/dataset.hpp"

#include "tssd/error.hpp"
#include "tssd/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

namespace tssd {

Dataset::Dataset(std::size_t num_classes, std::size_t feature_dim, std::vector<Sample> samples)
    : num_classes_(num_classes), feature_dim_(feature_dim), samples_(std::move(samples)) {
    if (num_classes_ == 0) throw InvalidSpec("dataset needs at least one class");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        if (s.id != i) throw InvalidSpec("sample ids must be 0..N-1 in order");
        if (s.features.size() != feature_dim_) throw InvalidSpec("feature length differs from D");
        if (s.logits.size() != num_classes_) throw InvalidSpec("logit length differs from K");
        if (s.noisy_label >= num_classes_) throw InvalidSpec("noisy label out of range");
        if (s.true_label && *s.true_label >= num_classes_)
            throw InvalidSpec("true label out of range");
    }
}

bool Dataset::has_truth() const {
    return !samples_.empty() &&
           std::all_of(samples_.begin(), samples_.end(),
                       [](const Sample& s) { return s.true_label.has_value(); });
}

std::optional<std::vector<bool>> Dataset::clean_mask() const {
    if (!has_truth()) return std::nullopt;
    std::vector<bool> mask(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i)
        mask[i] = samples_[i].noisy_label == *samples_[i].true_label;
    return mask;
}

double Dataset::flip_fraction() const {
    auto mask = clean_mask();
    if (!mask) return 0.0;
    const auto clean = std::count(mask->begin(), mask->end(), true);
    return 1.0 - static_cast<double>(clean) / static_cast<double>(mask->size());
}

Dataset Dataset::subset(const std::vector<SampleId>& ids) const {
    std::vector<Sample> rows;
    rows.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Sample s = samples_.at(ids[i]);
        s.id = i;
        rows.push_back(std::move(s));
    }
    return Dataset(num_classes_, feature_dim_, std::move(rows));
}

Dataset Dataset::with_noisy_labels(const std::vector<ClassId>& labels) const {
    if (labels.size() != samples_.size()) throw ContractViolation("label count differs from N");
    std::vector<Sample> rows = samples_;
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].noisy_label = labels[i];
    return Dataset(num_classes_, feature_dim_, std::move(rows));
}

// ---------------------------------------------------------------------------
// Sample-Table CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

long long parse_int(std::string_view field, std::size_t line) {
    field = trim(field);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("expected integer, got '" + std::string(field) + "'", line);
    return v;
}

double parse_real(std::string_view field, std::size_t line) {
    field = trim(field);
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("expected number, got '" + std::string(field) + "'", line);
    if (!std::isfinite(v)) throw ParseError("non-finite value", line);
    return v;
}

void write_real(std::ostream& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
}

}  // namespace

Dataset read_sample_table(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++lineno;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_commas(line);
    if (header.size() < 3 || trim(header[0]) != "id" || trim(header[1]) != "noisy_label" ||
        trim(header[2]) != "true_label")
        throw ParseError("header must start with id,noisy_label,true_label", lineno);

    std::size_t dim = 0;
    std::size_t k = 0;
    std::size_t col = 3;
    while (col < header.size() && trim(header[col]) == "feat_" + std::to_string(dim)) {
        ++dim;
        ++col;
    }
    while (col < header.size() && trim(header[col]) == "logit_" + std::to_string(k)) {
        ++k;
        ++col;
    }
    if (col != header.size())
        throw ParseError("unexpected header column '" + std::string(trim(header[col])) + "'", lineno);
    if (k == 0) throw ParseError("header declares no logit columns", lineno);

    std::vector<Sample> rows;
    std::vector<std::size_t> row_lines;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        Sample s;
        const long long id = parse_int(fields[0], lineno);
        const long long noisy = parse_int(fields[1], lineno);
        const long long truth = parse_int(fields[2], lineno);
        if (id < 0) throw ParseError("negative id", lineno);
        if (noisy < 0 || static_cast<std::size_t>(noisy) >= k)
            throw ParseError("noisy_label out of range [0," + std::to_string(k) + ")", lineno);
        if (truth < -1 || (truth >= 0 && static_cast<std::size_t>(truth) >= k))
            throw ParseError("true_label out of range", lineno);
        s.id = static_cast<SampleId>(id);
        s.noisy_label = static_cast<ClassId>(noisy);
        if (truth >= 0) s.true_label = static_cast<ClassId>(truth);
        s.features.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j) s.features.push_back(parse_real(fields[3 + j], lineno));
        s.logits.reserve(k);
        for (std::size_t j = 0; j < k; ++j) s.logits.push_back(parse_real(fields[3 + dim + j], lineno));
        rows.push_back(std::move(s));
        row_lines.push_back(lineno);
    }
    if (rows.empty()) throw ParseError("no samples", lineno);

    // Ids may arrive in any order but must cover 0..N-1 exactly once.
    std::vector<Sample> ordered(rows.size());
    std::vector<bool> seen(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const SampleId id = rows[r].id;
        if (id >= rows.size()) throw ParseError("id outside 0..N-1", row_lines[r]);
        if (seen[id]) throw ParseError("duplicate id " + std::to_string(id), row_lines[r]);
        seen[id] = true;
        ordered[id] = std::move(rows[r]);
    }
    return Dataset(k, dim, std::move(ordered));
}

Dataset load_sample_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_sample_table(in);
}

void write_sample_table(const Dataset& dataset, std::ostream& out) {
    out << "id,noisy_label,true_label";
    for (std::size_t j = 0; j < dataset.feature_dim(); ++j) out << ",feat_" << j;
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) out << ",logit_" << j;
    out << '\n';
    for (const Sample& s : dataset.samples()) {
        out << s.id << ',' << s.noisy_label << ',';
        if (s.true_label)
            out << *s.true_label;
        else
            out << -1;
        for (double v : s.features) {
            out << ',';
            write_real(out, v);
        }
        for (double v : s.logits) {
            out << ',';
            write_real(out, v);
        }
        out << '\n';
    }
}

void save_sample_table(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_sample_table(dataset, out);
    if (!out) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic benchmark

namespace {

std::vector<std::vector<double>> make_centroids(std::size_t k, std::size_t dim, Rng& rng) {
    std::vector<std::vector<double>> centroids(k, std::vector<double>(dim, 0.0));
    if (dim >= k) {
        for (std::size_t c = 0; c < k; ++c) centroids[c][c] = 1.0;
        return centroids;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& row : centroids) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& v : row) {
                v = gauss(rng);
                norm += v * v;
            }
        } while (norm < 1e-12);
        norm = std::sqrt(norm);
        for (double& v : row) v /= norm;
    }
    return centroids;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes == 0 || spec.feature_dim == 0 || spec.num_samples == 0)
        throw InvalidSpec("K, D and N must be positive");
    if (spec.num_samples < spec.num_classes) throw InvalidSpec("N must be at least K");
    if (!(spec.cluster_spread > 0.0)) throw InvalidSpec("cluster_spread must be positive");
    if (!(spec.logit_sharpness > 0.0)) throw InvalidSpec("logit_sharpness must be positive");
    if (!(spec.logit_jitter >= 0.0)) throw InvalidSpec("logit_jitter must be non-negative");

    Rng centroid_rng(derive_seed(spec.seed, "synthetic/centroids"));
    const auto centroids = make_centroids(spec.num_classes, spec.feature_dim, centroid_rng);

    Rng rng(derive_seed(spec.seed, "synthetic/samples"));
    std::uniform_int_distribution<std::size_t> pick_class(0, spec.num_classes - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Sample> samples(spec.num_samples);
    for (std::size_t i = 0; i < spec.num_samples; ++i) {
        Sample& s = samples[i];
        s.id = i;
        const ClassId c = pick_class(rng);
        s.true_label = c;
        s.noisy_label = c;
        s.features.resize(spec.feature_dim);
        for (std::size_t j = 0; j < spec.feature_dim; ++j)
            s.features[j] = centroids[c][j] + spec.cluster_spread * gauss(rng);
        s.logits.resize(spec.num_classes);
        for (std::size_t j = 0; j < spec.num_classes; ++j)
            s.logits[j] = (j == c ? spec.logit_sharpness : 0.0) + spec.logit_jitter * gauss(rng);
    }
    return Dataset(spec.num_classes, spec.feature_dim, std::move(samples));
}

Dataset inject_noise(const Dataset& dataset, const NoiseSpec& spec) {
    if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) throw InvalidSpec("noise rate must be in [0,1]");
    if (!dataset.empty() && !dataset.has_truth())
        throw InvalidSpec("noise injection needs true labels");

    const std::size_t n = dataset.size();
    const std::size_t k = dataset.num_classes();
    const auto count = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(n)));

    Rng rng(derive_seed(spec.seed, "noise"));
    std::vector<SampleId> order(n);
    std::iota(order.begin(), order.end(), SampleId{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = *dataset[i].true_label;

    std::uniform_int_distribution<std::size_t> pick_class(0, k - 1);
    for (std::size_t r = 0; r < count; ++r) {
        const SampleId id = order[r];
        if (spec.kind == NoiseKind::Symmetric)
            labels[id] = pick_class(rng);
        else
            labels[id] = (labels[id] + 1) % k;
    }
    return dataset.with_noisy_labels(labels);
}

std::vector<NoisyCluster> partition_by_label(const Dataset& dataset) {
    std::vector<NoisyCluster> clusters(dataset.num_classes());
    for (std::size_t c = 0; c < clusters.size(); ++c) clusters[c].class_id = c;
    for (const Sample& s : dataset.samples()) clusters[s.noisy_label].member_ids.push_back(s.id);
    return clusters;
}

Split holdout_split(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw InvalidSpec("holdout fraction must be in [0,1)");
    std::vector<SampleId> order(n);
    std::iota(order.begin(), order.end(), SampleId{0});
    Rng rng(derive_seed(seed, "holdout"));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    Split split;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

}  // namespace tssd
