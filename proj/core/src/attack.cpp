#include "advaudio/attack.hpp"

#include "advaudio/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace advaudio {

void AttackConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (population_size < 1) {
        fail("population_size must be positive");
    }
    if (max_iter < 1) {
        fail("max_iter must be positive");
    }
    if (!(temperature > 0.0)) {
        fail("temperature must be positive");
    }
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
        fail("mutation_prob must be in [0, 1]");
    }
    if (mutation_span < 0 || mutation_span > 255) {
        fail("mutation_span must be in [0, 255]");
    }
    if (!(perturb_fraction > 0.0 && perturb_fraction <= 1.0)) {
        fail("perturb_fraction must be in (0, 1]");
    }
    if (elite_count >= population_size) {
        fail("elite_count must be smaller than population_size");
    }
}

namespace {

std::int16_t project_sample(std::int16_t reference, std::int32_t value)
{
    const LsbRange r = lsb_range(reference);
    return static_cast<std::int16_t>(std::clamp(value, r.lo, r.hi));
}

void require_same_length(const AudioClip& a, const AudioClip& b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "clips have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " samples");
    }
}

} // namespace

AudioClip lsb_project(const AudioClip& original, const AudioClip& candidate)
{
    require_same_length(original, candidate);
    AudioClip out = candidate;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.samples[i] = project_sample(original.samples[i], candidate.samples[i]);
    }
    return out;
}

bool satisfies_lsb(const AudioClip& original, const AudioClip& candidate)
{
    if (original.size() != candidate.size()) {
        return false;
    }
    for (std::size_t i = 0; i < original.size(); ++i) {
        if ((original.samples[i] >> 8) != (candidate.samples[i] >> 8)) {
            return false;
        }
    }
    return true;
}

Population initialize_population(const AudioClip& original, const AttackConfig& config, Rng& rng)
{
    config.validate();
    const std::uint64_t base = rng.next_u64();
    const std::size_t n = original.size();
    const auto subset = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(config.perturb_fraction * static_cast<double>(n))), 1, std::max<std::size_t>(n, 1));

    Population pop;
    pop.members.reserve(config.population_size);
    pop.members.push_back({original, std::nullopt});
    std::vector<std::size_t> indices(n);
    for (std::size_t slot = 1; slot < config.population_size; ++slot) {
        Rng slot_rng(derive_seed(base, slot));
        Candidate c{original, std::nullopt};
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        for (std::size_t k = 0; k < subset && k < n; ++k) {
            const std::size_t pick = k + slot_rng.uniform_below(n - k);
            std::swap(indices[k], indices[pick]);
            const std::size_t i = indices[k];
            const auto delta = slot_rng.uniform_int(-config.mutation_span, config.mutation_span);
            c.clip.samples[i] = project_sample(original.samples[i], original.samples[i] + static_cast<std::int32_t>(delta));
        }
        pop.members.push_back(std::move(c));
    }
    return pop;
}

namespace {

std::vector<ProbVector> evaluate_population(const Population& population, const Oracle& oracle, std::size_t jobs)
{
    const std::size_t size = population.members.size();
    std::vector<ProbVector> probs(size);
    jobs = std::clamp<std::size_t>(jobs, 1, size);
    if (jobs == 1) {
        for (std::size_t i = 0; i < size; ++i) {
            probs[i] = oracle.predict(population.members[i].clip);
        }
        return probs;
    }
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < size; i += jobs) {
                probs[i] = oracle.predict(population.members[i].clip);
            }
        });
    }
    workers.clear(); // join
    return probs;
}

std::vector<double> score_population(Population& population, const std::vector<ProbVector>& probs,
                                     const AttackGoal& goal)
{
    std::vector<double> scores(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (goal.label >= probs[i].size()) {
            throw Error(ErrorCode::InvalidTarget, "label index " + std::to_string(goal.label)
                            + " is out of range for " + std::to_string(probs[i].size()) + " labels");
        }
        scores[i] = goal.score(probs[i]);
        population.members[i].fitness = scores[i];
    }
    return scores;
}

// Lowest index wins ties.
std::size_t best_index(std::span<const double> scores)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

std::size_t sample_index(std::span<const double> cumulative, Rng& rng)
{
    const double u = rng.uniform01() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) {
        return cumulative.size() - 1;
    }
    return static_cast<std::size_t>(it - cumulative.begin());
}

} // namespace

std::vector<double> compute_fitness(Population& population, const Oracle& oracle, const AttackGoal& goal, std::size_t jobs)
{
    return score_population(population, evaluate_population(population, oracle, jobs), goal);
}

std::vector<double> selection_probs(std::span<const double> scores, double temperature)
{
    std::vector<double> out(scores.size());
    if (scores.empty()) {
        return out;
    }
    const double peak = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp((scores[i] - peak) / temperature);
        total += out[i];
    }
    for (double& p : out) {
        p /= total;
    }
    return out;
}

Candidate crossover(const Candidate& parent1, const Candidate& parent2, Rng& rng)
{
    require_same_length(parent1.clip, parent2.clip);
    Candidate child{parent1.clip, std::nullopt};
    const std::size_t n = child.clip.size();
    for (std::size_t block = 0; block < n; block += 64) {
        std::uint64_t bits = rng.next_u64();
        const std::size_t end = std::min(n, block + 64);
        for (std::size_t i = block; i < end; ++i, bits >>= 1) {
            if (bits & 1u) {
                child.clip.samples[i] = parent2.clip.samples[i];
            }
        }
    }
    return child;
}

Candidate mutate(const Candidate& child, const AttackConfig& config, Rng& rng)
{
    Candidate out{child.clip, std::nullopt};
    const std::size_t n = out.clip.size();
    if (config.mutation_prob <= 0.0 || n == 0) {
        return out;
    }
    std::size_t i = 0;
    for (;;) {
        i += rng.geometric_skip(config.mutation_prob, n);
        if (i >= n) {
            break;
        }
        const auto delta = rng.uniform_int(-config.mutation_span, config.mutation_span);
        const std::int16_t s = out.clip.samples[i];
        out.clip.samples[i] = project_sample(s, s + static_cast<std::int32_t>(delta));
        ++i;
    }
    return out;
}

Population next_generation(const Population& population, std::span<const double> scores, const AttackConfig& config,
                           Rng& rng)
{
    const std::uint64_t base = rng.next_u64();
    const std::size_t size = population.members.size();

    std::vector<std::size_t> order(size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const auto probs = selection_probs(scores, config.temperature);
    std::vector<double> cumulative(size);
    std::partial_sum(probs.begin(), probs.end(), cumulative.begin());

    Population next;
    next.generation = population.generation + 1;
    next.members.reserve(size);
    const std::size_t elites = std::min(config.elite_count, size);
    for (std::size_t e = 0; e < elites; ++e) {
        next.members.push_back(population.members[order[e]]);
    }
    for (std::size_t slot = elites; slot < size; ++slot) {
        Rng slot_rng(derive_seed(base, slot));
        const std::size_t p1 = sample_index(cumulative, slot_rng);
        const std::size_t p2 = sample_index(cumulative, slot_rng);
        Candidate child = crossover(population.members[p1], population.members[p2], slot_rng);
        next.members.push_back(mutate(child, config, slot_rng));
    }
    return next;
}

namespace {

AttackResult run_attack(const AudioClip& original, std::optional<std::size_t> label, bool targeted,
                        const Oracle& oracle, const AttackConfig& config, std::size_t jobs)
{
    config.validate();
    Rng rng(config.seed);
    Population pop = initialize_population(original, config, rng);

    AttackResult result;
    AttackGoal goal;
    std::size_t best = 0;
    ProbVector best_probs;
    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        const auto probs = evaluate_population(pop, oracle, jobs);
        result.queries_used += pop.members.size();
        result.iterations_used = iter + 1;

        if (iter == 0) {
            // Member 0 is the untouched original, so its prediction settles the
            // preconditions without an extra query.
            const std::size_t original_top = probs[0].top();
            const std::size_t k = probs[0].size();
            if (targeted) {
                if (*label >= k) {
                    throw Error(ErrorCode::InvalidTarget, "target index " + std::to_string(*label)
                                    + " is out of range for " + std::to_string(k) + " labels");
                }
                if (original_top == *label) {
                    throw Error(ErrorCode::InvalidTarget, "the original clip is already classified as the target");
                }
                goal = AttackGoal::targeted(*label);
                result.target_label = *label;
            } else {
                if (label && *label >= k) {
                    throw Error(ErrorCode::InvalidTarget, "source index " + std::to_string(*label) + " is out of range");
                }
                if (label && original_top != *label) {
                    throw Error(ErrorCode::InvalidTarget, "the original clip is not classified as its source label");
                }
                goal = AttackGoal::untargeted(original_top);
            }
            result.source_label = original_top;
        }

        const auto scores = score_population(pop, probs, goal);
        best = best_index(scores);
        best_probs = probs[best];
        result.best_fitness.push_back(scores[best]);
        if (goal.reached(best_probs)) {
            result.success = true;
            break;
        }
        if (iter + 1 < config.max_iter) {
            pop = next_generation(pop, scores, config, rng);
        }
    }

    result.adversarial = pop.members[best].clip;
    result.final_label = best_probs.top();
    result.noise = noise_metrics(original, result.adversarial);
    return result;
}

} // namespace

AttackResult run_targeted_attack(const AudioClip& original, std::size_t target, const Oracle& oracle,
                                 const AttackConfig& config, std::size_t jobs)
{
    return run_attack(original, target, true, oracle, config, jobs);
}

AttackResult run_untargeted_attack(const AudioClip& original, const Oracle& oracle, const AttackConfig& config,
                                   std::optional<std::size_t> source, std::size_t jobs)
{
    return run_attack(original, source, false, oracle, config, jobs);
}

} // namespace advaudio
