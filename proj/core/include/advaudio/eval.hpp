#pragma once

#include "advaudio/attack.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/noise.hpp"
#include "advaudio/victim_model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advaudio {

/// One attack as written to attacks.csv.
struct AttackRecord {
    std::string mode;   // "targeted" or "untargeted"
    std::string source;
    std::string target; // "*" for untargeted attacks
    std::string clip_id;
    bool success = false;
    std::size_t iterations = 0;
    std::uint64_t queries = 0;
    std::string final_label;
    NoiseReport noise;
    std::string wav_path; // relative to the output directory; empty if not written
    double wall_seconds = 0.0; // not exported (varies run to run)
};

/// Source x target success statistics. Row = source, column = target, both
/// in label-set order. Diagonal cells (and cells with no attempts) hold NaN
/// in success_rate and mean_iterations and are excluded from aggregates.
struct AttackMatrix {
    std::vector<std::string> labels;
    std::vector<std::size_t> attempts;
    std::vector<std::size_t> successes;
    std::vector<double> success_rate;
    std::vector<double> mean_iterations;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t cell(std::size_t source, std::size_t target) const { return source * labels.size() + target; }
    double overall_success_rate() const;
    std::size_t total_attempts() const;

    /// NaN cells compare equal to NaN cells.
    bool same_as(const AttackMatrix& other) const;
};

AttackMatrix aggregate_matrix(const std::vector<std::string>& labels, const std::vector<AttackRecord>& records);

struct EvalOptions {
    std::size_t clips_per_label = 5;
    std::size_t jobs = 1;
    /// When set, each adversarial clip is written to <out_dir>/<source>_<target>_<clip>.wav.
    std::optional<std::filesystem::path> out_dir;
};

struct EvalReport {
    AttackMatrix matrix;              // empty for untargeted runs
    std::vector<AttackRecord> records;
    std::vector<std::string> skipped; // "<label>/<clip>" of misclassified clips passed over
};

/// Picks clips_per_label correctly classified clips per label (shuffled with
/// the master seed, misclassified clips skipped and replaced) and attacks
/// each toward every other label. Each attack's seed is derived from
/// (config.seed, source, clip id, target), so results do not depend on job
/// count or ordering. Throws InsufficientCorpus or UnknownLabel.
EvalReport build_attack_matrix(const Corpus& corpus, const VictimModel& model, const AttackConfig& config,
                               const EvalOptions& options);

/// Same clip selection, one untargeted attack per clip.
EvalReport run_untargeted_batch(const Corpus& corpus, const VictimModel& model, const AttackConfig& config,
                                const EvalOptions& options);

/// Long format, one row per (source, target) including the diagonal.
void export_matrix_csv(const AttackMatrix& matrix, const std::filesystem::path& path);
AttackMatrix read_matrix_csv(const std::filesystem::path& path);

void export_attacks_csv(const std::vector<AttackRecord>& records, const std::filesystem::path& path);
std::vector<AttackRecord> read_attacks_csv(const std::filesystem::path& path);

struct Summary {
    std::size_t attempts = 0;
    std::size_t successes = 0;
    double overall_success_rate = 0.0;
    std::size_t median_iterations = 0;
    double median_wall_time = 0.0;
    double mean_snr_db = 0.0; // over records with finite SNR
};

/// Medians use the lower median for even counts. Throws EmptyRecords.
Summary summarize(const std::vector<AttackRecord>& records);

void write_summary(const Summary& summary, const std::filesystem::path& path);

} // namespace advaudio
