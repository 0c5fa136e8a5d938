#pragma once

#include "tssd/dataset.hpp"
#include "tssd/distill.hpp"
#include "tssd/ssl.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tssd {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4 };

/// Everything a subcommand can be configured with. Sub-seeds are derived from `seed`
/// by resolve_seeds, so the per-stage seed fields are not settable directly.
struct RunConfig {
    SyntheticSpec synthetic;
    NoiseSpec noise;
    SelectionConfig selection;
    TrainConfig train;
    double test_fraction = 0.2;
    std::filesystem::path output = "out";
    std::uint64_t seed = 0;
};

/// Defaults of the train subcommand: per-class percentile cutoffs for t1/t2 at the nominal
/// benchmark noise rate, since posteriors from a trained model drift between rounds.
RunConfig default_train_config();

/// "sym:0.4" or "asym:0.2".
NoiseSpec parse_noise(std::string_view text);
std::string format_noise(const NoiseSpec& noise);

/// Sets one flat key. Throws InvalidSpec for unknown keys and bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment. Throws InvalidSpec with the line number.
void apply_config_text(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Names accepted by apply_setting, in echo order.
const std::vector<std::string>& config_keys();

/// Effective configuration as a flat JSON object keyed like the config file.
nlohmann::json config_to_json(const RunConfig& config);

/// Copy with every stage seed derived from the global seed.
RunConfig resolve_seeds(const RunConfig& config);

/// Split that cmd_train evaluates on.
Split train_split(const RunConfig& config, std::size_t n);

nlohmann::json sizes_json(const Partition& partition);

/// Single-shot selection on the file's own logits and features.
struct DistillRun {
    Partition partition;
    nlohmann::json report;
};
DistillRun run_distill(const RunConfig& config, const Dataset& dataset);

struct TrainRun {
    Ensemble ensemble;
    std::optional<MetaNet> meta_net;
    std::vector<std::pair<SampleId, std::string>> tags;  // ids of the input file
    nlohmann::json report;
};
TrainRun run_train(const RunConfig& config, const Dataset& dataset);

/// Joins partition tags with a truth table on id; P and C count as selected.
/// Throws IdMismatch when a partition id is absent from the truth table or repeated.
nlohmann::json evaluate_partition(const std::vector<std::pair<SampleId, std::string>>& tags,
                                  const Dataset& truth);

/// Throws InvalidSpec when a report lacks a key or a key has the wrong type.
void validate_report(const nlohmann::json& report);

/// Entry point of the `tssd` executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tssd
