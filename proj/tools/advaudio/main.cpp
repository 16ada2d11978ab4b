// advaudio: train a keyword classifier, attack it, and evaluate attacks.

#include "advaudio/attack.hpp"
#include "advaudio/audio_io.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/dsp.hpp"
#include "advaudio/error.hpp"
#include "advaudio/eval.hpp"
#include "advaudio/rng.hpp"
#include "advaudio/victim_model.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace advaudio;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAttackFailed = 2;

struct SeedOption {
    std::optional<std::uint64_t> value;

    std::uint64_t resolve()
    {
        if (!value) {
            std::random_device rd;
            value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            std::cout << "seed: " << *value << " (random)\n";
        }
        return *value;
    }
};

struct CorpusSource {
    std::optional<fs::path> dir;
    bool synthetic = false;
    SyntheticCorpusConfig synth;

    Corpus load() const
    {
        if (synthetic) {
            return make_synthetic_corpus(synth);
        }
        return load_corpus_dir(*dir);
    }
};

void add_synthetic_options(CLI::App& cmd, SyntheticCorpusConfig& synth)
{
    cmd.add_option("--synthetic-labels", synth.num_labels, "Labels in the synthetic corpus")
        ->capture_default_str()
        ->check(CLI::Range(2, 10));
    cmd.add_option("--synthetic-clips", synth.clips_per_label, "Clips per label in the synthetic corpus")
        ->capture_default_str();
    cmd.add_option("--synthetic-seed", synth.seed, "Seed of the synthetic corpus (identifies the dataset)")
        ->capture_default_str();
    cmd.add_option("--synthetic-peak-min", synth.peak_min, "Lowest burst peak, fraction of full scale")
        ->capture_default_str();
    cmd.add_option("--synthetic-peak-max", synth.peak_max, "Highest burst peak, fraction of full scale")
        ->capture_default_str();
    cmd.add_option("--synthetic-noise-min", synth.noise_min, "Lowest background noise stddev")->capture_default_str();
    cmd.add_option("--synthetic-noise-max", synth.noise_max, "Highest background noise stddev")->capture_default_str();
}

void add_corpus_options(CLI::App& cmd, CorpusSource& source)
{
    auto* dir = cmd.add_option("--corpus", source.dir, "Corpus directory laid out as <label>/<clip>.wav")
                    ->check(CLI::ExistingDirectory);
    auto* synthetic = cmd.add_flag("--synthetic", source.synthetic, "Use the built-in synthetic corpus");
    dir->excludes(synthetic);
    synthetic->excludes(dir);
    add_synthetic_options(cmd, source.synth);
}

void add_dsp_options(CLI::App& cmd, DspConfig& dsp)
{
    cmd.add_option("--frame-length", dsp.frame_length, "Samples per analysis frame")->capture_default_str();
    cmd.add_option("--hop-length", dsp.hop_length, "Samples between frame starts")->capture_default_str();
    cmd.add_option("--fft-size", dsp.fft_size, "FFT length (power of two)")->capture_default_str();
    cmd.add_option("--mel-filters", dsp.num_mel_filters, "Mel filterbank size")->capture_default_str();
    cmd.add_option("--cepstra", dsp.num_cepstra, "Cepstral coefficients kept")->capture_default_str();
    cmd.add_option("--fmin", dsp.fmin, "Lowest filterbank frequency, Hz")->capture_default_str();
    cmd.add_option("--fmax", dsp.fmax, "Highest filterbank frequency, Hz")->capture_default_str();
    cmd.add_option("--log-floor", dsp.log_floor, "Added to band energies before the log")->capture_default_str();
}

void add_attack_options(CLI::App& cmd, AttackConfig& config)
{
    cmd.add_option("--population", config.population_size, "Population size")->capture_default_str();
    cmd.add_option("--max-iter", config.max_iter, "Generation limit")->capture_default_str();
    cmd.add_option("--temperature", config.temperature, "Selection softmax temperature")->capture_default_str();
    cmd.add_option("--mutation-prob", config.mutation_prob, "Per-sample mutation probability")
        ->capture_default_str();
    cmd.add_option("--mutation-span", config.mutation_span, "Largest mutation delta")->capture_default_str();
    cmd.add_option("--perturb-fraction", config.perturb_fraction, "Fraction of samples perturbed at start")
        ->capture_default_str();
    cmd.add_option("--elite", config.elite_count, "Members copied unchanged each generation (0 disables)")
        ->capture_default_str();
}

void add_common(CLI::App& cmd, SeedOption* seed, std::size_t* jobs)
{
    cmd.add_option("--config", "key=value file of long option names; command-line flags win");
    if (seed) {
        cmd.add_option("--seed", seed->value, "Master seed (default: random, printed)");
    }
    if (jobs) {
        cmd.add_option("--jobs", *jobs, "Worker thread cap")->capture_default_str()->check(CLI::PositiveNumber);
    }
}

CLI::Option* add_model_option(CLI::App& cmd, fs::path& model, bool output)
{
    auto* opt = cmd.add_option("--model", model, output ? "Model file to write" : "Model file to read");
    if (output) {
        return opt->required();
    }
    return opt->envname("ADVAUDIO_MODEL")->required()->check(CLI::ExistingFile);
}

void print_noise(const NoiseReport& noise)
{
    std::printf("changed_samples: %zu\nchanged_fraction: %.6f\nmax_abs_delta: %d\nrms_delta: %.3f\nsnr_db: %.2f\n",
                noise.changed_sample_count, noise.changed_fraction, noise.max_abs_delta, noise.rms_delta,
                noise.snr_db);
}

void print_probs(const VictimModel& model, const ProbVector& p)
{
    std::printf("label: %s\n", model.labels().name(p.top()).c_str());
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::printf("  %-12s %.6f\n", model.labels().name(i).c_str(), p[i]);
    }
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag)
{
    for (const auto& a : args) {
        if (a == flag || a.rfind(flag + "=", 0) == 0) {
            return true;
        }
    }
    return false;
}

// Replaces "--config FILE" with the file's key=value pairs as "--key=value"
// arguments, skipping keys also given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::optional<std::string> file;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!file) {
        return args;
    }
    std::ifstream in(*file);
    if (!in) {
        throw CLI::FileError::Missing(*file);
    }
    std::vector<std::string> extra;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw CLI::ConversionError(*file + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = "--" + trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (!has_flag(args, key)) {
            extra.push_back(key + "=" + value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

AudioClip load_input(const fs::path& path)
{
    return pad_or_trim(read_wav(path), kCanonicalClipSamples);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Black-box genetic adversarial attacks on a keyword-spotting classifier"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // train
    CorpusSource train_corpus;
    std::optional<fs::path> holdout_dir;
    TrainingConfig training;
    DspConfig train_dsp;
    fs::path train_model;
    SeedOption train_seed;
    auto* train_cmd = app.add_subcommand("train", "Train the victim classifier and write a model file");
    add_common(*train_cmd, &train_seed, nullptr);
    add_corpus_options(*train_cmd, train_corpus);
    train_cmd->add_option("--holdout", holdout_dir, "Held-out corpus directory to report accuracy on")
        ->check(CLI::ExistingDirectory);
    add_model_option(*train_cmd, train_model, true);
    train_cmd->add_option("--epochs", training.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--lr", training.learning_rate, "SGD learning rate")->capture_default_str();
    train_cmd->add_option("--batch-size", training.batch_size, "Mini-batch size")->capture_default_str();
    train_cmd->add_option("--conv-filters", training.conv_filters, "Convolution filters")->capture_default_str();
    train_cmd->add_option("--hidden", training.hidden, "Hidden dense units")->capture_default_str();
    add_dsp_options(*train_cmd, train_dsp);

    // attack
    fs::path attack_model;
    fs::path attack_input;
    std::optional<fs::path> attack_output;
    std::optional<std::string> attack_target;
    bool attack_untargeted = false;
    AttackConfig attack_config;
    SeedOption attack_seed;
    std::size_t attack_jobs = 1;
    auto* attack_cmd = app.add_subcommand("attack", "Attack one clip");
    add_common(*attack_cmd, &attack_seed, &attack_jobs);
    add_model_option(*attack_cmd, attack_model, false);
    attack_cmd->add_option("--input", attack_input, "Clip to attack")->required()->check(CLI::ExistingFile);
    attack_cmd->add_option("--out", attack_output, "Where to write the adversarial clip on success");
    auto* target_opt = attack_cmd->add_option("--target", attack_target, "Target label");
    auto* untargeted_opt = attack_cmd->add_flag("--untargeted", attack_untargeted, "Any label but the source");
    target_opt->excludes(untargeted_opt);
    add_attack_options(*attack_cmd, attack_config);

    // evaluate
    fs::path eval_model;
    CorpusSource eval_corpus;
    fs::path eval_out;
    EvalOptions eval_options;
    bool eval_untargeted = false;
    AttackConfig eval_config;
    SeedOption eval_seed;
    auto* eval_cmd = app.add_subcommand("evaluate", "Attack clips_per_label clips of every label toward every other label");
    add_common(*eval_cmd, &eval_seed, &eval_options.jobs);
    add_model_option(*eval_cmd, eval_model, false);
    add_corpus_options(*eval_cmd, eval_corpus);
    eval_cmd->add_option("--clips-per-label", eval_options.clips_per_label, "Correctly classified clips per label")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", eval_out, "Output directory for CSVs, summary and adversarial clips")->required();
    eval_cmd->add_flag("--untargeted", eval_untargeted, "One untargeted attack per clip instead of the matrix");
    add_attack_options(*eval_cmd, eval_config);

    // classify
    fs::path classify_model;
    fs::path classify_input;
    auto* classify_cmd = app.add_subcommand("classify", "Print the top label and class probabilities of a clip");
    add_common(*classify_cmd, nullptr, nullptr);
    add_model_option(*classify_cmd, classify_model, false);
    classify_cmd->add_option("wav", classify_input, "Clip to classify")->required()->check(CLI::ExistingFile);

    // mfcc-dump
    fs::path dump_input;
    std::optional<fs::path> dump_output;
    DspConfig dump_dsp;
    auto* dump_cmd = app.add_subcommand("mfcc-dump", "Write MFCC features as CSV, one row per frame");
    add_common(*dump_cmd, nullptr, nullptr);
    dump_cmd->add_option("wav", dump_input, "Input clip")->required()->check(CLI::ExistingFile);
    dump_cmd->add_option("--out", dump_output, "CSV file (default: stdout)");
    add_dsp_options(*dump_cmd, dump_dsp);

    // synth-corpus
    SyntheticCorpusConfig synth;
    fs::path synth_out;
    auto* synth_cmd = app.add_subcommand("synth-corpus", "Write the synthetic corpus as WAV files");
    add_common(*synth_cmd, nullptr, nullptr);
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    add_synthetic_options(*synth_cmd, synth);

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        args.pop_back();
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train_cmd) {
            if (!train_corpus.synthetic && !train_corpus.dir) {
                throw CLI::RequiredError("--corpus or --synthetic");
            }
            training.seed = train_seed.resolve();
            const Corpus corpus = train_corpus.load();
            const VictimModel model = train(corpus, training, train_dsp);
            std::printf("train_accuracy: %.4f\n", accuracy(model, corpus));
            if (holdout_dir) {
                std::printf("holdout_accuracy: %.4f\n", accuracy(model, load_corpus_dir(*holdout_dir)));
            }
            save_model(model, train_model);
            std::printf("model: %s\n", train_model.string().c_str());
            return kExitOk;
        }

        if (*attack_cmd) {
            if (!attack_target && !attack_untargeted) {
                throw CLI::RequiredError("--target or --untargeted");
            }
            attack_config.seed = attack_seed.resolve();
            const VictimModel model = load_model(attack_model);
            const AudioClip original = load_input(attack_input);
            const AttackResult result = attack_target
                ? run_targeted_attack(original, model.labels().index_of(*attack_target), model, attack_config,
                                      attack_jobs)
                : run_untargeted_attack(original, model, attack_config, std::nullopt, attack_jobs);
            std::printf("success: %s\nsource: %s\nfinal_label: %s\niterations: %zu\nqueries: %llu\n",
                        result.success ? "true" : "false", model.labels().name(result.source_label).c_str(),
                        model.labels().name(result.final_label).c_str(), result.iterations_used,
                        static_cast<unsigned long long>(result.queries_used));
            print_noise(result.noise);
            if (!result.success) {
                return kExitAttackFailed;
            }
            if (attack_output) {
                write_wav(result.adversarial, *attack_output);
                std::printf("output: %s\n", attack_output->string().c_str());
            }
            return kExitOk;
        }

        if (*eval_cmd) {
            if (!eval_corpus.synthetic && !eval_corpus.dir) {
                throw CLI::RequiredError("--corpus or --synthetic");
            }
            eval_config.seed = eval_seed.resolve();
            const VictimModel model = load_model(eval_model);
            const Corpus corpus = eval_corpus.load();
            eval_options.out_dir = eval_out;
            const EvalReport report = eval_untargeted ? run_untargeted_batch(corpus, model, eval_config, eval_options)
                                                      : build_attack_matrix(corpus, model, eval_config, eval_options);
            if (!eval_untargeted) {
                export_matrix_csv(report.matrix, eval_out / "matrix.csv");
            }
            export_attacks_csv(report.records, eval_out / "attacks.csv");
            const Summary summary = summarize(report.records);
            write_summary(summary, eval_out / "summary.txt");
            std::printf("attacks: %zu\nsuccesses: %zu\noverall_success_rate: %.4f\nmedian_iterations: %zu\n"
                        "median_wall_time_s: %.3f\nmean_snr_db: %.2f\n",
                        summary.attempts, summary.successes, summary.overall_success_rate,
                        summary.median_iterations, summary.median_wall_time, summary.mean_snr_db);
            return kExitOk;
        }

        if (*classify_cmd) {
            const VictimModel model = load_model(classify_model);
            print_probs(model, model.predict(load_input(classify_input)));
            return kExitOk;
        }

        if (*dump_cmd) {
            const FeatureMatrix features = mfcc(read_wav(dump_input), dump_dsp);
            std::FILE* out = stdout;
            if (dump_output) {
                out = std::fopen(dump_output->string().c_str(), "w");
                if (!out) {
                    throw Error(ErrorCode::IoError, "cannot open " + dump_output->string() + " for writing");
                }
            }
            for (std::size_t f = 0; f < features.num_frames; ++f) {
                for (std::size_t c = 0; c < features.num_coeffs; ++c) {
                    std::fprintf(out, c == 0 ? "%.17g" : ",%.17g", features.at(f, c));
                }
                std::fputc('\n', out);
            }
            if (out != stdout && std::fclose(out) != 0) {
                throw Error(ErrorCode::IoError, "write failed for " + dump_output->string());
            }
            return kExitOk;
        }

        if (*synth_cmd) {
            write_corpus_dir(make_synthetic_corpus(synth), synth_out);
            std::printf("wrote %zu labels x %zu clips to %s\n", synth.num_labels, synth.clips_per_label,
                        synth_out.string().c_str());
            return kExitOk;
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
