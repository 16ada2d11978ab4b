#pragma once

#include "advaudio/audio_io.hpp"
#include "advaudio/noise.hpp"
#include "advaudio/oracle.hpp"
#include "advaudio/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace advaudio {

/// Genetic search parameters. An attack that has not reached its goal after
/// max_iter generations is reported as a failure.
struct AttackConfig {
    std::size_t population_size = 20;
    std::size_t max_iter = 500;
    double temperature = 0.01;
    double mutation_prob = 0.005;
    std::int32_t mutation_span = 255;
    double perturb_fraction = 0.1;
    std::size_t elite_count = 2; // 0 disables elitism
    std::uint64_t seed = 0;

    /// Throws InvalidConfig.
    void validate() const;
};

/// A perturbed clip. Invariant: every sample keeps the high byte of the
/// attack's original clip.
struct Candidate {
    AudioClip clip;
    std::optional<double> fitness;
};

struct Population {
    std::vector<Candidate> members;
    std::size_t generation = 0;
};

struct AttackGoal {
    enum class Kind { Targeted, Untargeted };

    Kind kind = Kind::Targeted;
    std::size_t label = 0; // target for Targeted, source for Untargeted

    static AttackGoal targeted(std::size_t target) { return {Kind::Targeted, target}; }
    static AttackGoal untargeted(std::size_t source) { return {Kind::Untargeted, source}; }

    double score(const ProbVector& p) const { return kind == Kind::Targeted ? p[label] : 1.0 - p[label]; }
    bool reached(const ProbVector& p) const
    {
        return kind == Kind::Targeted ? p.top() == label : p.top() != label;
    }
};

struct AttackResult {
    AudioClip adversarial;
    bool success = false;
    std::size_t iterations_used = 0;
    std::uint64_t queries_used = 0;
    std::size_t source_label = 0;
    std::optional<std::size_t> target_label; // unset for untargeted attacks
    std::size_t final_label = 0;              // top prediction for `adversarial`
    NoiseReport noise;
    std::vector<double> best_fitness;         // one entry per evaluated generation
};

/// Lowest and highest sample values sharing the high byte of `reference`.
struct LsbRange {
    std::int32_t lo;
    std::int32_t hi;
};

inline LsbRange lsb_range(std::int16_t reference)
{
    const std::int32_t base = (static_cast<std::int32_t>(reference) >> 8) * 256;
    return {base, base + 255};
}

/// Clamps each candidate sample into the 256-value window of the original's
/// high byte. Throws LengthMismatch.
AudioClip lsb_project(const AudioClip& original, const AudioClip& candidate);

/// True when every sample of `candidate` shares its high byte with `original`.
bool satisfies_lsb(const AudioClip& original, const AudioClip& candidate);

/// Member 0 is the unmodified original. Every other member perturbs a fresh
/// random subset of max(1, ceil(perturb_fraction * N)) samples by uniform
/// deltas in [-mutation_span, mutation_span], projected onto the LSB window.
/// One base seed is drawn from `rng`; slot i uses stream derive_seed(base, i).
Population initialize_population(const AudioClip& original, const AttackConfig& config, Rng& rng);

/// Queries the oracle once per member; targeted score is p[t], untargeted
/// score is 1 - p[s]. Writes each member's fitness and returns the scores.
/// `jobs` > 1 spreads queries over threads; results are stored by slot.
std::vector<double> compute_fitness(Population& population, const Oracle& oracle, const AttackGoal& goal,
                                    std::size_t jobs = 1);

/// softmax(scores / temperature) with max subtraction.
std::vector<double> selection_probs(std::span<const double> scores, double temperature);

/// Uniform crossover: each sample comes from parent1 or parent2 with
/// probability 1/2.
Candidate crossover(const Candidate& parent1, const Candidate& parent2, Rng& rng);

/// Each sample, with probability mutation_prob, gets a uniform delta in
/// [-mutation_span, mutation_span] and is clamped back into its own high-byte
/// window (which equals the original's for an LSB-valid child).
Candidate mutate(const Candidate& child, const AttackConfig& config, Rng& rng);

/// Keeps the elite_count best members (ties: lower index first) and fills the
/// remaining slots with mutated crossover children of parents drawn with
/// replacement from selection_probs. One base seed is drawn from `rng`; the
/// child in slot i uses stream derive_seed(base, i).
Population next_generation(const Population& population, std::span<const double> scores, const AttackConfig& config,
                           Rng& rng);

/// Genetic search for a clip classified as `target`. Throws InvalidTarget if
/// `target` is out of range or already the original's top label.
AttackResult run_targeted_attack(const AudioClip& original, std::size_t target, const Oracle& oracle,
                                 const AttackConfig& config, std::size_t jobs = 1);

/// Genetic search for any label other than the source. The source defaults to
/// the original's top label; passing one that differs throws InvalidTarget.
AttackResult run_untargeted_attack(const AudioClip& original, const Oracle& oracle, const AttackConfig& config,
                                   std::optional<std::size_t> source = std::nullopt, std::size_t jobs = 1);

} // namespace advaudio
