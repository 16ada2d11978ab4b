#include "advaudio/attack.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/dsp.hpp"
#include "advaudio/victim_model.hpp"

#include <benchmark/benchmark.h>

using namespace advaudio;

namespace {

const Corpus& bench_corpus()
{
    static const Corpus corpus = [] {
        SyntheticCorpusConfig config;
        config.clips_per_label = 10;
        return make_synthetic_corpus(config);
    }();
    return corpus;
}

const VictimModel& bench_model()
{
    static const VictimModel model = [] {
        TrainingConfig config;
        config.epochs = 5;
        return train(bench_corpus(), config);
    }();
    return model;
}

void BM_Mfcc(benchmark::State& state)
{
    const MfccExtractor extractor{DspConfig{}};
    const AudioClip& clip = bench_corpus().front().clip;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extractor(clip));
    }
}
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMicrosecond);

void BM_Predict(benchmark::State& state)
{
    const VictimModel& model = bench_model();
    const AudioClip& clip = bench_corpus().front().clip;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict(clip));
    }
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMicrosecond);

// One GA generation: fitness over the population, then breeding.
void BM_Generation(benchmark::State& state)
{
    const VictimModel& model = bench_model();
    const AudioClip& clip = bench_corpus().front().clip;
    AttackConfig config;
    Rng rng(1);
    Population pop = initialize_population(clip, config, rng);
    const AttackGoal goal = AttackGoal::targeted(1);
    for (auto _ : state) {
        const auto scores = compute_fitness(pop, model, goal, static_cast<std::size_t>(state.range(0)));
        pop = next_generation(pop, scores, config, rng);
    }
}
BENCHMARK(BM_Generation)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Breed(benchmark::State& state)
{
    const AudioClip& clip = bench_corpus().front().clip;
    AttackConfig config;
    Rng rng(2);
    const Population pop = initialize_population(clip, config, rng);
    const std::vector<double> scores(config.population_size, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(next_generation(pop, scores, config, rng));
    }
}
BENCHMARK(BM_Breed)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
