#include "advaudio/eval.hpp"

#include "advaudio/error.hpp"
#include "advaudio/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace advaudio {

namespace fs = std::filesystem;

double AttackMatrix::overall_success_rate() const
{
    const std::size_t n = total_attempts();
    if (n == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t wins = 0;
    for (std::size_t s = 0; s < size(); ++s) {
        for (std::size_t t = 0; t < size(); ++t) {
            if (s != t) {
                wins += successes[cell(s, t)];
            }
        }
    }
    return static_cast<double>(wins) / static_cast<double>(n);
}

std::size_t AttackMatrix::total_attempts() const
{
    std::size_t n = 0;
    for (std::size_t s = 0; s < size(); ++s) {
        for (std::size_t t = 0; t < size(); ++t) {
            if (s != t) {
                n += attempts[cell(s, t)];
            }
        }
    }
    return n;
}

bool AttackMatrix::same_as(const AttackMatrix& other) const
{
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                          [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); });
    };
    return labels == other.labels && attempts == other.attempts && successes == other.successes
        && same(success_rate, other.success_rate) && same(mean_iterations, other.mean_iterations);
}

AttackMatrix aggregate_matrix(const std::vector<std::string>& labels, const std::vector<AttackRecord>& records)
{
    const std::size_t k = labels.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    AttackMatrix m;
    m.labels = labels;
    m.attempts.assign(k * k, 0);
    m.successes.assign(k * k, 0);
    m.success_rate.assign(k * k, nan);
    m.mean_iterations.assign(k * k, nan);

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < k; ++i) {
        index[labels[i]] = i;
    }
    auto lookup = [&](const std::string& label) {
        const auto it = index.find(label);
        if (it == index.end()) {
            throw Error(ErrorCode::UnknownLabel, "record label '" + label + "' is not in the matrix");
        }
        return it->second;
    };
    std::vector<double> iteration_sum(k * k, 0.0);
    for (const auto& r : records) {
        if (r.mode != "targeted") {
            continue;
        }
        const std::size_t c = m.cell(lookup(r.source), lookup(r.target));
        ++m.attempts[c];
        m.successes[c] += r.success ? 1 : 0;
        iteration_sum[c] += static_cast<double>(r.iterations);
    }
    for (std::size_t s = 0; s < k; ++s) {
        for (std::size_t t = 0; t < k; ++t) {
            const std::size_t c = m.cell(s, t);
            if (s != t && m.attempts[c] > 0) {
                const double n = static_cast<double>(m.attempts[c]);
                m.success_rate[c] = static_cast<double>(m.successes[c]) / n;
                m.mean_iterations[c] = iteration_sum[c] / n;
            }
        }
    }
    return m;
}

namespace {

struct Job {
    const CorpusEntry* entry;
    std::size_t source;
    std::optional<std::size_t> target;
};

std::vector<std::vector<const CorpusEntry*>> select_clips(const Corpus& corpus, const VictimModel& model,
                                                         std::size_t clips_per_label, std::uint64_t seed,
                                                         std::vector<std::string>& skipped)
{
    const LabelSet& labels = model.labels();
    std::vector<std::vector<const CorpusEntry*>> by_label(labels.size());
    for (const auto& e : corpus) {
        if (!e.clip.label) {
            throw Error(ErrorCode::UnknownLabel, "clip '" + e.id + "' has no label");
        }
        by_label[labels.index_of(e.label())].push_back(&e);
    }

    std::vector<std::vector<const CorpusEntry*>> chosen(labels.size());
    for (std::size_t l = 0; l < labels.size(); ++l) {
        auto& pool = by_label[l];
        Rng rng(derive_seed(seed, hash_string(labels.name(l))));
        for (std::size_t i = pool.size(); i > 1; --i) {
            std::swap(pool[i - 1], pool[rng.uniform_below(i)]);
        }
        for (const CorpusEntry* e : pool) {
            if (chosen[l].size() == clips_per_label) {
                break;
            }
            if (model.predict(e->clip).top() == l) {
                chosen[l].push_back(e);
            } else {
                skipped.push_back(e->label() + "/" + e->id);
                std::clog << "skipping misclassified clip " << e->label() << "/" << e->id << '\n';
            }
        }
        if (chosen[l].size() < clips_per_label) {
            throw Error(ErrorCode::InsufficientCorpus, "label '" + labels.name(l) + "' has only "
                            + std::to_string(chosen[l].size()) + " correctly classified clips, need "
                            + std::to_string(clips_per_label));
        }
    }
    return chosen;
}

AttackRecord run_job(const Job& job, const VictimModel& model, const AttackConfig& base, const EvalOptions& options)
{
    const LabelSet& labels = model.labels();
    const std::string& source = labels.name(job.source);
    const std::string target = job.target ? labels.name(*job.target) : std::string("*");

    AttackConfig config = base;
    config.seed = derive_seed(base.seed, hash_string(source), hash_string(job.entry->id), hash_string(target));

    const auto start = std::chrono::steady_clock::now();
    const AttackResult result = job.target
        ? run_targeted_attack(job.entry->clip, *job.target, model, config)
        : run_untargeted_attack(job.entry->clip, model, config, job.source);
    const auto stop = std::chrono::steady_clock::now();

    AttackRecord r;
    r.mode = job.target ? "targeted" : "untargeted";
    r.source = source;
    r.target = target;
    r.clip_id = job.entry->id;
    r.success = result.success;
    r.iterations = result.iterations_used;
    r.queries = result.queries_used;
    r.final_label = labels.name(result.final_label);
    r.noise = result.noise;
    r.wall_seconds = std::chrono::duration<double>(stop - start).count();
    if (options.out_dir) {
        r.wav_path = source + "_" + (job.target ? target : std::string("any")) + "_" + job.entry->id + ".wav";
        AudioClip out = result.adversarial;
        out.label.reset();
        write_wav(out, *options.out_dir / r.wav_path);
    }
    return r;
}

EvalReport run_jobs(const Corpus& corpus, const VictimModel& model, const AttackConfig& config,
                    const EvalOptions& options, bool targeted)
{
    config.validate();
    if (options.clips_per_label == 0) {
        throw Error(ErrorCode::InvalidConfig, "clips_per_label must be positive");
    }
    if (options.out_dir) {
        std::error_code ec;
        fs::create_directories(*options.out_dir, ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + options.out_dir->string() + ": " + ec.message());
        }
    }

    EvalReport report;
    const auto chosen = select_clips(corpus, model, options.clips_per_label, config.seed, report.skipped);
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < chosen.size(); ++s) {
        for (const CorpusEntry* e : chosen[s]) {
            if (!targeted) {
                jobs.push_back({e, s, std::nullopt});
                continue;
            }
            for (std::size_t t = 0; t < chosen.size(); ++t) {
                if (t != s) {
                    jobs.push_back({e, s, t});
                }
            }
        }
    }

    report.records.resize(jobs.size());
    const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(jobs.size(), 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                report.records[i] = run_job(jobs[i], model, config, options);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = jobs.size();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    if (targeted) {
        report.matrix = aggregate_matrix(model.labels().names(), report.records);
    }
    return report;
}

// Fields are quoted only when they contain a comma, quote or newline.
std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw Error(ErrorCode::IoError, "bad number '" + s + "' in CSV");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& s)
{
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) {
        throw Error(ErrorCode::IoError, "bad integer '" + s + "' in CSV");
    }
    return v;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, const std::string& expected_header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != expected_header) {
        throw Error(ErrorCode::IoError, path.string() + " does not start with the expected header");
    }
    const std::size_t columns = split_csv_line(expected_header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != columns) {
            throw Error(ErrorCode::IoError, path.string() + ": row has " + std::to_string(fields.size())
                            + " fields, expected " + std::to_string(columns));
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

const std::string kMatrixHeader = "source,target,attempts,successes,success_rate,mean_iterations";
const std::string kAttacksHeader = "mode,source,target,clip_id,success,iterations,queries,final_label,"
                                   "changed_samples,changed_fraction,max_abs_delta,rms_delta,snr_db,wav_path";

} // namespace

EvalReport build_attack_matrix(const Corpus& corpus, const VictimModel& model, const AttackConfig& config,
                               const EvalOptions& options)
{
    return run_jobs(corpus, model, config, options, true);
}

EvalReport run_untargeted_batch(const Corpus& corpus, const VictimModel& model, const AttackConfig& config,
                                const EvalOptions& options)
{
    return run_jobs(corpus, model, config, options, false);
}

void export_matrix_csv(const AttackMatrix& matrix, const fs::path& path)
{
    auto out = open_out(path);
    out << kMatrixHeader << '\n';
    for (std::size_t s = 0; s < matrix.size(); ++s) {
        for (std::size_t t = 0; t < matrix.size(); ++t) {
            const std::size_t c = matrix.cell(s, t);
            out << csv_field(matrix.labels[s]) << ',' << csv_field(matrix.labels[t]) << ',' << matrix.attempts[c]
                << ',' << matrix.successes[c] << ',' << fmt_double(matrix.success_rate[c]) << ','
                << fmt_double(matrix.mean_iterations[c]) << '\n';
        }
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

AttackMatrix read_matrix_csv(const fs::path& path)
{
    const auto rows = read_csv_rows(path, kMatrixHeader);
    AttackMatrix m;
    for (const auto& row : rows) {
        if (std::find(m.labels.begin(), m.labels.end(), row[0]) == m.labels.end()) {
            m.labels.push_back(row[0]);
        }
    }
    const std::size_t k = m.labels.size();
    if (rows.size() != k * k) {
        throw Error(ErrorCode::IoError, path.string() + " is not a square matrix");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row[0] != m.labels[i / k] || row[1] != m.labels[i % k]) {
            throw Error(ErrorCode::IoError, path.string() + ": rows are not in source-major label order");
        }
        m.attempts.push_back(parse_uint(row[2]));
        m.successes.push_back(parse_uint(row[3]));
        m.success_rate.push_back(parse_double(row[4]));
        m.mean_iterations.push_back(parse_double(row[5]));
    }
    return m;
}

void export_attacks_csv(const std::vector<AttackRecord>& records, const fs::path& path)
{
    auto out = open_out(path);
    out << kAttacksHeader << '\n';
    for (const auto& r : records) {
        out << csv_field(r.mode) << ',' << csv_field(r.source) << ',' << csv_field(r.target) << ','
            << csv_field(r.clip_id) << ',' << (r.success ? 1 : 0) << ',' << r.iterations << ',' << r.queries << ','
            << csv_field(r.final_label) << ',' << r.noise.changed_sample_count << ','
            << fmt_double(r.noise.changed_fraction) << ',' << r.noise.max_abs_delta << ','
            << fmt_double(r.noise.rms_delta) << ',' << fmt_double(r.noise.snr_db) << ',' << csv_field(r.wav_path)
            << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

std::vector<AttackRecord> read_attacks_csv(const fs::path& path)
{
    std::vector<AttackRecord> records;
    for (const auto& row : read_csv_rows(path, kAttacksHeader)) {
        AttackRecord r;
        r.mode = row[0];
        r.source = row[1];
        r.target = row[2];
        r.clip_id = row[3];
        r.success = parse_uint(row[4]) != 0;
        r.iterations = parse_uint(row[5]);
        r.queries = parse_uint(row[6]);
        r.final_label = row[7];
        r.noise.changed_sample_count = parse_uint(row[8]);
        r.noise.changed_fraction = parse_double(row[9]);
        r.noise.max_abs_delta = static_cast<std::int32_t>(parse_uint(row[10]));
        r.noise.rms_delta = parse_double(row[11]);
        r.noise.snr_db = parse_double(row[12]);
        r.wav_path = row[13];
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

template <typename T>
T lower_median(std::vector<T> values)
{
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

} // namespace

Summary summarize(const std::vector<AttackRecord>& records)
{
    if (records.empty()) {
        throw Error(ErrorCode::EmptyRecords, "no attack records to summarize");
    }
    Summary s;
    s.attempts = records.size();
    std::vector<std::size_t> iterations;
    std::vector<double> wall;
    double snr_sum = 0.0;
    std::size_t snr_count = 0;
    for (const auto& r : records) {
        s.successes += r.success ? 1 : 0;
        iterations.push_back(r.iterations);
        wall.push_back(r.wall_seconds);
        if (std::isfinite(r.noise.snr_db)) {
            snr_sum += r.noise.snr_db;
            ++snr_count;
        }
    }
    s.overall_success_rate = static_cast<double>(s.successes) / static_cast<double>(s.attempts);
    s.median_iterations = lower_median(iterations);
    s.median_wall_time = lower_median(wall);
    s.mean_snr_db = snr_count > 0 ? snr_sum / static_cast<double>(snr_count) : std::numeric_limits<double>::infinity();
    return s;
}

void write_summary(const Summary& summary, const fs::path& path)
{
    auto out = open_out(path);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "attempts: %zu\nsuccesses: %zu\noverall_success_rate: %.6f\nmedian_iterations: %zu\n"
                  "median_wall_time_s: %.3f\nmean_snr_db: %.3f\n",
                  summary.attempts, summary.successes, summary.overall_success_rate, summary.median_iterations,
                  summary.median_wall_time, summary.mean_snr_db);
    out << buf;
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

} // namespace advaudio
