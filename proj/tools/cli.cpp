#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "esdiv/error.hpp"
#include "esdiv/extract.hpp"
#include "esdiv/hash.hpp"
#include "esdiv/kernels.hpp"
#include "esdiv/rng.hpp"
#include "esdiv/semantics.hpp"
#include "json.hpp"

namespace esdiv::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename onto " + path.string() + ": " + ec.message());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string item(s.substr(pos, end - pos));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorCode::InvalidArgument, "not a number: " + s);
  return v;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// stops the remaining work and is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

bool is_nl(Domain d) { return d != Domain::Code; }

bool applies(MetricKind m, Domain d) {
  switch (m) {
    case MetricKind::SemanticFixed:
    case MetricKind::SemanticPair:
    case MetricKind::Syntactic: return !is_nl(d);
    case MetricKind::NlSoft:
    case MetricKind::NlHard: return is_nl(d);
    case MetricKind::Lexical:
    case MetricKind::Neural:
    case MetricKind::ValidityRate: return true;
  }
  return false;
}

constexpr MetricKind kAllMetrics[] = {
    MetricKind::ValidityRate, MetricKind::SemanticFixed, MetricKind::SemanticPair,
    MetricKind::Lexical,      MetricKind::Syntactic,     MetricKind::Neural,
    MetricKind::NlSoft,       MetricKind::NlHard,
};

bool wants(const std::vector<MetricKind>& metrics, MetricKind m) {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

// ---------------------------------------------------------------------------
// Trace cache

std::string trace_line(const ExecutionTrace& t, const std::string& key,
                       const std::string& problem_id) {
  nlohmann::ordered_json j;
  j["generation_id"] = t.generation_id;
  j["problem_id"] = problem_id;
  j["cache_key"] = key;
  auto outcomes = nlohmann::ordered_json::array();
  for (const auto& o : t.outcomes) {
    nlohmann::ordered_json jo;
    jo["status"] = std::string(to_string(o.status));
    jo["value_trace"] = o.value_trace ? nlohmann::ordered_json(*o.value_trace)
                                      : nlohmann::ordered_json(nullptr);
    jo["stdout"] = o.stdout_text;
    outcomes.push_back(std::move(jo));
  }
  j["outcomes"] = std::move(outcomes);
  j["valid"] = t.valid;
  return j.dump();
}

std::map<std::string, ExecutionTrace> load_trace_cache(const fs::path& path) {
  std::map<std::string, ExecutionTrace> cache;
  if (!fs::exists(path)) return cache;
  std::istringstream in(read_file(path));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ExecutionTrace t;
      t.generation_id = j.at("generation_id").get<std::string>();
      for (const auto& jo : j.at("outcomes")) {
        TestOutcome o;
        auto status = parse_test_status(jo.at("status").get<std::string>());
        if (!status) throw Error(ErrorCode::MalformedRecord, "unknown status");
        o.status = *status;
        if (!jo.at("value_trace").is_null()) o.value_trace = jo["value_trace"].get<std::string>();
        o.stdout_text = jo.at("stdout").get<std::string>();
        t.outcomes.push_back(std::move(o));
      }
      t.valid = j.at("valid").get<bool>();
      cache[j.at("cache_key").get<std::string>()] = std::move(t);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cache;
}

std::string cache_key(const std::string& problem_id, const std::string& identity,
                      const std::string& generation_id, const std::string& source,
                      const std::string& runner_fp) {
  std::string material = problem_id;
  for (const auto* part : {&identity, &generation_id}) {
    material += '\0';
    material += *part;
  }
  material += '\0';
  material += sha256_hex(source);
  material += '\0';
  material += runner_fp;
  return sha256_hex(material);
}

// ---------------------------------------------------------------------------

struct GenerationWork {
  std::size_t set_index = 0;
  std::size_t gen_index = 0;
  std::optional<ExtractedProgram> program;
  std::string key;
  ExecutionTrace trace;
  bool cached = false;
};

PairSampler sampler_for(std::size_t K, std::uint64_t seed) {
  return K <= kExhaustivePairLimit ? PairSampler::all()
                                   : PairSampler::sampled(kSampledKernelPairs, seed);
}

DiversityScore make_score(const GenerationSet& set, MetricKind m, double value,
                          std::size_t pairs, std::uint64_t seed) {
  DiversityScore s;
  s.problem_id = set.problem_id;
  s.model_id = set.model_id;
  s.config = set.config;
  s.metric = m;
  s.value = value;
  s.pairs_evaluated = pairs;
  s.seed = seed;
  return s;
}

DiversityScore pair_score(const GenerationSet& set, MetricKind m, const PairAverage& avg,
                          const PairSampler& sampler) {
  return make_score(set, m, avg.value, avg.pairs_evaluated, sampler.exhaustive ? 0 : sampler.seed);
}

std::unique_ptr<JudgeClient> make_judge(const RunManifest& m) {
  if (m.judge_stub) {
    auto stub = std::make_unique<StubJudgeClient>();
    if (m.judge_script) stub->load_script(*m.judge_script);
    return stub;
  }
  if (m.remote_judge) return std::make_unique<RemoteJudgeClient>(*m.remote_judge);
  throw Error(ErrorCode::InvalidArgument, "judge metrics need --judge-stub or JUDGE_ENDPOINT");
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RunnerUnavailable:
    case ErrorCode::JudgeUnavailable:
    case ErrorCode::MalformedJudgeReply:
    case ErrorCode::Io: return kExitInfrastructure;
    default: return kExitValidation;
  }
}

std::string error_json(const Error& e) {
  nlohmann::ordered_json j;
  j["error"] = std::string(to_string(e.code()));
  j["message"] = e.what();
  j["exit_code"] = exit_code_for(e.code());
  return j.dump();
}

std::vector<MetricKind> parse_metric_list(std::string_view list) {
  std::vector<MetricKind> out;
  for (const auto& name : split_list(list)) {
    auto m = parse_metric_kind(name);
    if (!m) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + name + "'");
    if (!wants(out, *m)) out.push_back(*m);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
  return out;
}

std::vector<MetricKind> default_metrics() {
  return {MetricKind::ValidityRate, MetricKind::SemanticFixed, MetricKind::SemanticPair,
          MetricKind::Lexical, MetricKind::Syntactic};
}

void RunManifest::validate() const {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "missing corpus path");
  if (generations.empty()) throw Error(ErrorCode::InvalidArgument, "missing generations path");
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "missing output directory");
  if (metrics.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "worker budget must be at least 1");
  if (wants(metrics, MetricKind::Neural) && !embeddings) {
    throw Error(ErrorCode::InvalidArgument, "metric 'neural' requires --embeddings");
  }
  if ((wants(metrics, MetricKind::NlSoft) || wants(metrics, MetricKind::NlHard)) && !judge_stub &&
      !remote_judge) {
    throw Error(ErrorCode::InvalidArgument,
                "judge metrics require --judge-stub or JUDGE_ENDPOINT to be set");
  }
  runner.validate();
}

std::string set_identity(const GenerationSet& set) {
  return set.problem_id + "|" + set.model_id + "|" + std::string(to_string(set.config.template_kind)) +
         "|" + fmt(set.config.temperature, "%.17g") + "|" + std::to_string(set.config.seed);
}

std::string render_scores(const std::vector<DiversityScore>& scores) {
  std::string out;
  for (const auto& s : scores) out += serialize_score(s) + "\n";
  return out;
}

EvaluateSummary evaluate(const RunManifest& manifest) {
  manifest.validate();
  const auto problems = load_problems(manifest.corpus);
  const auto sets = load_generation_sets(manifest.generations, problems);
  std::map<std::string, const ProblemSpec*> by_id;
  for (const auto& p : problems) by_id[p.problem_id] = &p;

  EmbeddingTable embeddings;
  if (wants(manifest.metrics, MetricKind::Neural)) {
    embeddings = load_embeddings(*manifest.embeddings);
    for (const auto& set : sets) {
      for (const auto& g : set.generations) {
        if (!embeddings.count(g.generation_id)) {
          throw Error(ErrorCode::InvalidArgument, "no embedding for generation '" +
                                                      g.generation_id + "'");
        }
      }
    }
  }

  const bool any_nl = std::any_of(sets.begin(), sets.end(), [&](const GenerationSet& s) {
    return is_nl(by_id.at(s.problem_id)->domain);
  });
  std::unique_ptr<JudgeClient> judge;
  std::optional<Rubric> similarity_rubric;
  std::map<JudgeTask, Rubric> quality_rubrics;
  if (any_nl) {
    judge = make_judge(manifest);
    similarity_rubric = load_rubric(manifest.rubrics, JudgeTask::Similarity);
    for (const auto& s : sets) {
      auto task = quality_task_for(by_id.at(s.problem_id)->domain);
      if (task && !quality_rubrics.count(*task)) {
        quality_rubrics.emplace(*task, load_rubric(manifest.rubrics, *task));
      }
    }
  }

  ensure_directory(manifest.out);
  const fs::path traces_path = manifest.out / "traces.jsonl";
  const auto cache = load_trace_cache(traces_path);
  const std::string runner_fp = manifest.runner.fingerprint();

  // Extraction and cache lookup for every code generation.
  std::vector<GenerationWork> work;
  std::vector<std::vector<std::size_t>> work_of_set(sets.size());
  for (std::size_t si = 0; si < sets.size(); ++si) {
    const auto& set = sets[si];
    const auto& problem = *by_id.at(set.problem_id);
    if (is_nl(problem.domain)) continue;
    const auto identity = set_identity(set);
    for (std::size_t gi = 0; gi < set.size(); ++gi) {
      const auto& gen = set.generations[gi];
      GenerationWork w;
      w.set_index = si;
      w.gen_index = gi;
      auto extracted = extract_program(gen.raw_text, problem.target_function_name);
      std::string source_material;
      if (auto* p = std::get_if<ExtractedProgram>(&extracted)) {
        source_material = "program\n" + p->source;
        w.program = std::move(*p);
      } else {
        source_material = "extraction_failed\n" +
                          std::string(to_string(std::get<ExtractionFailure>(extracted).reason));
      }
      w.key = cache_key(set.problem_id, identity, gen.generation_id, source_material, runner_fp);
      if (!w.program) {
        w.trace = failed_extraction_trace(problem, gen.generation_id);
        w.cached = true;
      } else if (auto it = cache.find(w.key); it != cache.end()) {
        w.trace = it->second;
        w.cached = true;
      }
      work_of_set[si].push_back(work.size());
      work.push_back(std::move(w));
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!work[i].cached) pending.push_back(i);
  }
  parallel_for(pending.size(), manifest.workers, [&](std::size_t n) {
    auto& w = work[pending[n]];
    const auto& set = sets[w.set_index];
    w.trace = run_program(*w.program, *by_id.at(set.problem_id), manifest.runner,
                          set.generations[w.gen_index].generation_id);
  });

  EvaluateSummary summary;
  summary.executed = pending.size();
  for (const auto& w : work) {
    if (w.cached && w.program) ++summary.cached;
  }

  std::string traces_out;
  for (auto& w : work) {
    w.trace.valid = check_validity(w.trace, manifest.oracle);
    traces_out += trace_line(w.trace, w.key, sets[w.set_index].problem_id) + "\n";
  }
  write_file(traces_path, traces_out);

  for (std::size_t si = 0; si < sets.size(); ++si) {
    const auto& set = sets[si];
    const auto& problem = *by_id.at(set.problem_id);
    const std::size_t K = set.size();
    const auto identity = set_identity(set);
    const auto seed_for = [&](MetricKind m) {
      return derive_seed(manifest.seed, identity + "|" + std::string(to_string(m)));
    };

    // Text that the lexical kernel reads: the extracted program for code when
    // extraction succeeded, the raw generation otherwise.
    std::vector<std::string> texts(K);
    std::vector<SetEntry> entries(K);
    std::vector<double> quality(K, 0.0);
    std::vector<bool> valid(K, false);

    if (!is_nl(problem.domain)) {
      for (std::size_t n = 0; n < K; ++n) {
        const auto& w = work[work_of_set[si][n]];
        texts[n] = w.program ? w.program->source : set.generations[n].raw_text;
        entries[n] = to_entry(fingerprint(w.trace, set.problem_id));
        valid[n] = w.trace.valid;
      }
    } else {
      const auto& rubric = quality_rubrics.at(*quality_task_for(problem.domain));
      parallel_for(K, manifest.workers, [&](std::size_t n) {
        quality[n] = judge_quality(set.generations[n], rubric, *judge).normalized;
      });
      for (std::size_t n = 0; n < K; ++n) {
        texts[n] = set.generations[n].raw_text;
        valid[n] = quality[n] > kDefaultQualityThreshold;
      }
      summary.judge_calls += K;
    }

    for (MetricKind m : kAllMetrics) {
      if (!wants(manifest.metrics, m) || !applies(m, problem.domain)) continue;
      switch (m) {
        case MetricKind::ValidityRate: {
          const auto count = static_cast<double>(std::count(valid.begin(), valid.end(), true));
          summary.scores.push_back(make_score(set, m, count / static_cast<double>(K), 0, 0));
          break;
        }
        case MetricKind::SemanticFixed:
          summary.scores.push_back(make_score(set, m, div_fixed(entries), 0, 0));
          break;
        case MetricKind::SemanticPair: {
          const auto sampler = sampler_for(K, seed_for(m));
          summary.scores.push_back(pair_score(set, m, div_pair(entries, sampler), sampler));
          break;
        }
        case MetricKind::Lexical: {
          std::vector<TokenStream> streams;
          for (const auto& t : texts) streams.push_back(tokenize(t));
          const std::size_t vocabulary = distinct_ngram_count(streams);
          const auto sampler = sampler_for(K, seed_for(m));
          const auto avg = div_pair(
              K,
              [&](std::size_t j, std::size_t k) {
                return pair_lexical_distance(streams[j], streams[k], kDefaultNgram, vocabulary);
              },
              sampler);
          summary.scores.push_back(pair_score(set, m, avg, sampler));
          break;
        }
        case MetricKind::Syntactic: {
          std::vector<FragmentMultiset> parsed;
          for (std::size_t n = 0; n < K; ++n) {
            const auto& w = work[work_of_set[si][n]];
            if (!w.program) continue;
            auto c = canonicalize_ast(w.program->source);
            if (auto* ast = std::get_if<CanonicalAst>(&c)) parsed.push_back(extract_fragments(*ast));
          }
          if (parsed.size() < 2) {
            summary.scores.push_back(make_score(set, m, 0.0, 0, 0));
            break;
          }
          const auto sampler = sampler_for(parsed.size(), seed_for(m));
          const auto avg = div_pair(
              parsed.size(),
              [&](std::size_t j, std::size_t k) {
                return pair_syntactic_distance(parsed[j], parsed[k]);
              },
              sampler);
          summary.scores.push_back(pair_score(set, m, avg, sampler));
          break;
        }
        case MetricKind::Neural: {
          const auto sampler = sampler_for(K, seed_for(m));
          const auto avg = div_pair(
              K,
              [&](std::size_t j, std::size_t k) {
                return pair_neural_distance(embeddings.at(set.generations[j].generation_id),
                                            embeddings.at(set.generations[k].generation_id));
              },
              sampler);
          summary.scores.push_back(pair_score(set, m, avg, sampler));
          break;
        }
        case MetricKind::NlSoft:
        case MetricKind::NlHard: {
          // Both NL metrics share one sampled pair list and one set of similarity calls.
          if (m == MetricKind::NlHard && wants(manifest.metrics, MetricKind::NlSoft)) break;
          const auto seed = seed_for(MetricKind::NlSoft);
          const auto pairs = sample_pairs(K, kJudgePairs, seed);
          std::vector<IndexPair> distinct(pairs.begin(), pairs.end());
          std::sort(distinct.begin(), distinct.end(), [](const IndexPair& a, const IndexPair& b) {
            return std::tie(a.j, a.k) < std::tie(b.j, b.k);
          });
          distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
          std::vector<double> sim(distinct.size());
          parallel_for(distinct.size(), manifest.workers, [&](std::size_t n) {
            sim[n] = judge_similarity(set.generations[distinct[n].j],
                                      set.generations[distinct[n].k], *similarity_rubric, *judge)
                         .normalized;
          });
          summary.judge_calls += distinct.size();
          double soft = 0.0, hard = 0.0;
          for (const auto& p : pairs) {
            const auto it = std::lower_bound(
                distinct.begin(), distinct.end(), p, [](const IndexPair& a, const IndexPair& b) {
                  return std::tie(a.j, a.k) < std::tie(b.j, b.k);
                });
            const double s = sim[static_cast<std::size_t>(it - distinct.begin())];
            soft += soft_semantic_distance(quality[p.j], quality[p.k], s);
            hard += hard_nl_distance(quality[p.j], quality[p.k], s);
          }
          const double count = static_cast<double>(pairs.size());
          if (wants(manifest.metrics, MetricKind::NlSoft)) {
            summary.scores.push_back(
                make_score(set, MetricKind::NlSoft, soft / count, pairs.size(), seed));
          }
          if (wants(manifest.metrics, MetricKind::NlHard)) {
            summary.scores.push_back(
                make_score(set, MetricKind::NlHard, hard / count, pairs.size(), seed));
          }
          break;
        }
      }
    }
  }

  write_file(manifest.out / "scores.jsonl", render_scores(summary.scores));
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

std::string default_label(const std::vector<DiversityScore>& scores, const fs::path& path) {
  std::set<std::string> models;
  for (const auto& s : scores) models.insert(s.model_id);
  return models.size() == 1 ? *models.begin() : path.stem().string();
}

}  // namespace

std::vector<ComparisonRow> compare(const CompareOptions& opts) {
  const auto a = load_scores(opts.scores_a);
  const auto b = load_scores(opts.scores_b);
  std::string label_a = opts.label_a.empty() ? default_label(a, opts.scores_a) : opts.label_a;
  std::string label_b = opts.label_b.empty() ? default_label(b, opts.scores_b) : opts.label_b;
  if (label_a == label_b) {
    label_a += " (a)";
    label_b += " (b)";
  }
  const auto pairing = parse_pairing(opts.pairing);
  auto rows = compare_models(a, b, pairing, label_a, label_b);
  std::string csv = comparison_csv_header() + "\n";
  for (const auto& r : rows) csv += comparison_csv_row(r) + "\n";
  if (!opts.out.empty()) {
    ensure_directory(opts.out);
    write_file(opts.out / "comparison.csv", csv);
  }
  return rows;
}

std::string simulate_csv(const SimulateOptions& opts) {
  const ClusterDistribution dist(opts.distribution);
  if (opts.n_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty n grid");
  std::string csv = "n,div_fixed,div_pair,limit\n";
  const double limit = dist.pair_limit();
  for (std::size_t n : opts.n_grid) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be at least 2");
    const auto r = simulate_convergence(dist, n, derive_seed(opts.seed, "n=" + std::to_string(n)));
    csv += std::to_string(n) + "," + fmt(r.div_fixed, "%.10g") + "," + fmt(r.div_pair, "%.10g") +
           "," + fmt(limit, "%.10g") + "\n";
  }
  return csv;
}

std::map<std::string, double> load_model_metadata(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": expected an object of model_id -> params_b");
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(ErrorCode::MalformedRecord, "params for '" + k + "' is not a number");
    out[k] = v.get<double>();
  }
  return out;
}

ReportTables build_report(const std::vector<DiversityScore>& scores,
                          const std::map<std::string, double>& params_b) {
  std::set<std::string> missing;
  for (const auto& s : scores) {
    if (!params_b.count(s.model_id)) missing.insert(s.model_id);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MissingModelMetadata, "no parameter count for " + names);
  }

  using ConfigKey = std::tuple<std::string, std::string, double, std::int64_t>;
  const auto config_key = [](const DiversityScore& s) {
    return ConfigKey{s.model_id, std::string(to_string(s.config.template_kind)),
                     s.config.temperature, s.config.seed};
  };
  std::map<ConfigKey, std::map<MetricKind, std::vector<DiversityScore>>> by_config;
  std::map<std::string, std::vector<DiversityScore>> fixed_by_model;
  for (const auto& s : scores) {
    by_config[config_key(s)][s.metric].push_back(s);
    if (s.metric == MetricKind::SemanticFixed) fixed_by_model[s.model_id].push_back(s);
  }

  ReportTables t;
  t.avgdiv_csv = "model_id,template_kind,temperature,gen_seed,metric,n_problems,avg_div\n";
  t.raw_results_csv =
      "model_id,template_kind,temperature,gen_seed,Validity,Semantic,Lexical,Syntactic,Neural\n";
  for (const auto& [key, metrics] : by_config) {
    const auto& [model, tmpl, temperature, seed] = key;
    const std::string prefix =
        model + "," + tmpl + "," + fmt(temperature) + "," + std::to_string(seed) + ",";
    for (const auto& [metric, group] : metrics) {
      t.avgdiv_csv += prefix + std::string(to_string(metric)) + "," +
                      std::to_string(group.size()) + "," + fmt(avg_div(group)) + "\n";
    }
    t.raw_results_csv += prefix;
    const MetricKind columns[] = {MetricKind::ValidityRate, MetricKind::SemanticFixed,
                                  MetricKind::Lexical, MetricKind::Syntactic, MetricKind::Neural};
    for (std::size_t c = 0; c < std::size(columns); ++c) {
      if (auto it = metrics.find(columns[c]); it != metrics.end()) {
        t.raw_results_csv += fmt(avg_div(it->second));
      }
      t.raw_results_csv += c + 1 < std::size(columns) ? "," : "\n";
    }
  }

  t.efficiency_csv = "model_id,params_b,avg_semantic_fixed,efficiency\n";
  for (const auto& [model, group] : fixed_by_model) {
    const double params = params_b.at(model);
    const double avg = avg_div(group);
    t.efficiency_csv += model + "," + fmt(params) + "," + fmt(avg) + "," +
                        fmt(parameter_efficiency(avg, params)) + "\n";
  }
  return t;
}

ReportTables report(const ReportOptions& opts) {
  auto tables = build_report(load_scores(opts.scores), load_model_metadata(opts.models));
  ensure_directory(opts.out);
  write_file(opts.out / "avgdiv.csv", tables.avgdiv_csv);
  write_file(opts.out / "efficiency.csv", tables.efficiency_csv);
  write_file(opts.out / "raw_results.csv", tables.raw_results_csv);
  return tables;
}

// ---------------------------------------------------------------------------

namespace {

void print_comparison(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-15s %10s %12s %10s  %-20s %4s  %s\n", "metric", "W", "p",
                "d", "winner", "n", "note");
  out << line;
  for (const auto& r : rows) {
    const auto p = r.p ? fmt(*r.p) + (r.significant ? "*" : " ") : std::string("-");
    const auto d = r.d ? fmt(*r.d) + (r.large_effect ? "*" : " ") : std::string("-");
    std::snprintf(line, sizeof line, "%-15s %10s %12s %10s  %-20s %4zu  %s\n",
                  std::string(to_string(r.metric)).c_str(), r.w ? fmt(*r.w).c_str() : "-",
                  p.c_str(), d.c_str(), r.winner.c_str(), r.n_pairs, r.note.c_str());
    out << line;
  }
  out << "* p < 0.05 (p column), |d| > 0.8 (d column)\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective semantic diversity evaluation"};
  app.require_subcommand(1);

  RunManifest manifest;
  std::string embeddings, oracle = "default", metrics, judge_script;
  long timeout_ms = 0;
  auto* eval = app.add_subcommand("evaluate", "Score generation sets and write scores.jsonl");
  eval->add_option("--corpus", manifest.corpus, "problems.jsonl")->required();
  eval->add_option("--generations", manifest.generations, "generations.jsonl")->required();
  eval->add_option("--embeddings", embeddings, "embeddings.jsonl for the neural metric");
  eval->add_option("--oracle", oracle, "Validity oracle")
      ->check(CLI::IsMember({"default", "constrained"}));
  eval->add_option("--metrics", metrics, "Comma-separated metric kinds");
  eval->add_option("--seed", manifest.seed, "Base seed for pair sampling");
  eval->add_option("--workers", manifest.workers, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--out", manifest.out, "Output directory")->required();
  eval->add_option("--rubrics", manifest.rubrics, "Rubric directory");
  eval->add_flag("--judge-stub", manifest.judge_stub, "Use the deterministic stub judge");
  eval->add_option("--judge-script", judge_script, "Scripted stub judge replies (JSONL)");
  eval->add_option("--timeout-ms", timeout_ms, "Per-test timeout in milliseconds");

  CompareOptions cmp;
  auto* comp = app.add_subcommand("compare", "Paired Wilcoxon and Cohen's d between two score files");
  comp->add_option("scores_a", cmp.scores_a, "First scores.jsonl")->required();
  comp->add_option("scores_b", cmp.scores_b, "Second scores.jsonl")->required();
  comp->add_option("--pairing", cmp.pairing, "Pairing fields, e.g. problem_id,template_kind");
  comp->add_option("--label-a", cmp.label_a);
  comp->add_option("--label-b", cmp.label_b);
  comp->add_option("--out", cmp.out, "Directory for comparison.csv")->required();

  std::string dist, grid = "10,100,1000,5000", sim_out;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "Convergence of div_fixed and div_pair with set size");
  sim->add_option("--dist", dist, "Class probabilities, comma-separated")->required();
  sim->add_option("--n", grid, "Set sizes, comma-separated");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", sim_out, "CSV path (stdout when omitted)");

  ReportOptions rep;
  auto* rpt = app.add_subcommand("report", "AvgDiv, efficiency and raw-results tables");
  rpt->add_option("--scores", rep.scores)->required();
  rpt->add_option("--models", rep.models, "JSON object model_id -> params (billions)")->required();
  rpt->add_option("--out", rep.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*eval) {
      if (!embeddings.empty()) manifest.embeddings = embeddings;
      manifest.oracle =
          oracle == "constrained" ? ValidityOracle::constrained_int_list() : ValidityOracle::default_code();
      manifest.metrics = metrics.empty() ? default_metrics() : parse_metric_list(metrics);
      if (!judge_script.empty()) {
        manifest.judge_stub = true;
        manifest.judge_script = judge_script;
      }
      if (!manifest.judge_stub) manifest.remote_judge = RemoteJudgeConfig::from_env();
      if (const char* cmd = std::getenv("RUNNER_CMD"); cmd && *cmd) {
        manifest.runner.runner_command_template = cmd;
      }
      if (timeout_ms > 0) manifest.runner.per_test_timeout = std::chrono::milliseconds(timeout_ms);
      const auto summary = evaluate(manifest);
      out << "executed " << summary.executed << ", cached " << summary.cached << ", judge calls "
          << summary.judge_calls << "\n"
          << "wrote " << summary.scores.size() << " scores to "
          << (manifest.out / "scores.jsonl").string() << "\n";
    } else if (*comp) {
      print_comparison(compare(cmp), out);
      out << "wrote " << (cmp.out / "comparison.csv").string() << "\n";
    } else if (*sim) {
      SimulateOptions so;
      for (const auto& p : split_list(dist)) so.distribution.push_back(parse_double(p));
      for (const auto& n : split_list(grid)) {
        const double v = parse_double(n);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
          throw Error(ErrorCode::InvalidArgument, "not a set size: " + n);
        }
        so.n_grid.push_back(static_cast<std::size_t>(v));
      }
      so.seed = sim_seed;
      const auto csv = simulate_csv(so);
      if (sim_out.empty()) {
        out << csv;
      } else {
        write_file(sim_out, csv);
        out << "wrote " << sim_out << "\n";
      }
    } else if (*rpt) {
      report(rep);
      out << "wrote avgdiv.csv, efficiency.csv, raw_results.csv to " << rep.out.string() << "\n";
    }
  } catch (const Error& e) {
    err << error_json(e) << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << error_json(Error(ErrorCode::Io, e.what())) << "\n";
    return kExitInfrastructure;
  }
  return kExitOk;
}

}  // namespace esdiv::cli
