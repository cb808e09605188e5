// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdoh/brat_io.hpp"
#include "sdoh/corpus.hpp"
#include "sdoh/errors.hpp"
#include "sdoh/llm_client.hpp"
#include "sdoh/qa_pipeline.hpp"
#include "sdoh/random.hpp"
#include "sdoh/schema.hpp"
#include "sdoh/scoring.hpp"
#include "sdoh/significance.hpp"
#include "sdoh/text.hpp"

#ifndef SDOH_TOOL_VERSION
#define SDOH_TOOL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace sdoh::cli {
namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
}

/// Adds the file name to corpus loader diagnostics.
class FileError : public Error {
 public:
  FileError(const std::string& path, const std::string& what) : Error(path + ": " + what) {}
};

Schema load_schema_opt(const std::string& path) {
  if (path.empty()) return default_schema();
  try {
    return load_schema_file(path);
  } catch (const ParseError& e) {
    throw FileError(path, e.what());
  } catch (const ValidationError& e) {
    throw FileError(path, e.what());
  }
}

/// A JSONL corpus, or a BRAT directory written by brat-export.
Corpus load_corpus(const std::string& path, const Schema& schema) {
  try {
    if (fs::is_directory(path)) return brat::import_dir(path, schema);
    return read_corpus_jsonl(read_text(path), &schema);
  } catch (const DataError& e) {
    throw FileError(path, e.what());
  } catch (const ParseError& e) {
    throw FileError(path, e.what());
  }
}

std::vector<Level> parse_levels(const std::string& s) {
  if (s == "all") return {Level::Trigger, Level::Argument, Level::Event};
  if (s == "trigger") return {Level::Trigger};
  if (s == "argument") return {Level::Argument};
  if (s == "event") return {Level::Event};
  throw CLI::ValidationError("--level", "must be trigger, argument, event or all");
}

struct Invocation {
  RunManifest manifest;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  bool unsafe_show_text = false;
  std::string manifest_base;  // defaults to the first output
};

using Handler = std::function<void(Invocation&)>;

void record_options(const CLI::App& sub, RunManifest& m) {
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || name.empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      if (value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
    }
    m.options[name.substr(name.find_first_not_of('-'))] = value;
  }
}

// --- commands --------------------------------------------------------------

struct ScoreArgs {
  std::string gold, pred, schema, level = "all", out, split;
};

void cmd_score(Invocation& inv, const ScoreArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  const auto levels = parse_levels(a.level);
  Corpus gold = load_corpus(a.gold, schema);
  if (!a.split.empty()) {
    auto sp = parse_split(a.split);
    if (!sp) throw CLI::ValidationError("--split", "must be train, validation or test");
    gold = gold.subset(*sp);
  }
  const Corpus pred = load_corpus(a.pred, schema);
  const ScoreReport report = score(gold, pred, schema);
  const std::string table = render_table(report, levels);
  write_text(a.out + ".json", report_to_json(report));
  write_text(a.out + ".txt", table);
  *inv.out << table;
  inv.manifest.inputs = {a.gold, a.pred};
  inv.manifest.outputs = {a.out + ".json", a.out + ".txt"};
  inv.manifest_base = a.out;
}

struct IaaArgs {
  std::string a, b, schema, out;
};

void cmd_iaa(Invocation& inv, const IaaArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  const ScoreReport report = compute_iaa(load_corpus(a.a, schema), load_corpus(a.b, schema), schema);
  const std::string summary = render_iaa_summary(iaa_summary(report));
  write_text(a.out + ".json", report_to_json(report));
  write_text(a.out + ".txt", summary + "\n");
  *inv.out << summary << "\n";
  inv.manifest.inputs = {a.a, a.b};
  inv.manifest.outputs = {a.out + ".json", a.out + ".txt"};
  inv.manifest_base = a.out;
}

struct SignificanceArgs {
  std::string gold, pred_a, pred_b, schema, level = "trigger", key, out;
  bool combined = false;
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

void cmd_significance(Invocation& inv, const SignificanceArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  Metric metric;
  const auto levels = parse_levels(a.level);
  if (levels.size() != 1) throw CLI::ValidationError("--level", "significance needs a single level");
  metric.level = levels.front();
  if (!a.key.empty()) metric.key = a.key;
  metric.combined = a.combined;
  const BootstrapResult r = bootstrap_test(load_corpus(a.gold, schema), load_corpus(a.pred_a, schema),
                                           load_corpus(a.pred_b, schema), schema, metric, a.resamples, a.seed,
                                           a.threads);
  write_text(a.out, result_to_json(r));
  std::ostringstream p;
  p.precision(6);
  p << r.p_value;
  *inv.out << metric.describe() << ": delta " << r.observed_delta << ", p = " << p.str() << "\n"
           << "significant at 0.05: " << (r.significant() ? "yes" : "no") << "\n";
  inv.manifest.seeds["seed"] = a.seed;
  inv.manifest.inputs = {a.gold, a.pred_a, a.pred_b};
  inv.manifest.outputs = {a.out};
}

struct SectionsArgs {
  std::string input, rules, social_rules, out;
  bool all_sections = false;
};

std::vector<HeadingRule> load_rules(const std::string& path, std::vector<HeadingRule> fallback) {
  if (path.empty()) return fallback;
  nlohmann::json j = nlohmann::json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw FileError(path, "heading rules must be a JSON array");
  std::vector<HeadingRule> rules;
  for (const auto& r : j) {
    if (r.is_string()) {
      rules.push_back({r.get<std::string>(), false});
    } else if (r.is_object() && r.contains("pattern") && r["pattern"].is_string()) {
      rules.push_back({r["pattern"].get<std::string>(), r.value("case_insensitive", false)});
    } else {
      throw FileError(path, "each rule is a pattern string or {\"pattern\", \"case_insensitive\"}");
    }
  }
  return rules;
}

void cmd_sections(Invocation& inv, const SectionsArgs& a) {
  const auto rules = load_rules(a.rules, default_heading_rules());
  const auto social = load_rules(a.social_rules, default_social_history_rules());
  // Raw notes share the corpus record layout; events are ignored.
  const Corpus notes = load_corpus(a.input, default_schema());
  std::string out;
  std::size_t kept = 0;
  for (const auto& note : notes.docs) {
    const auto sections = extract_sections(note.document.text, rules);
    if (a.all_sections) {
      for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& s = sections[i];
        nlohmann::ordered_json j;
        j["doc_id"] = note.id();
        j["index"] = i;
        j["heading"] = s.heading;
        j["start"] = s.start;
        j["end"] = s.end;
        j["body"] = s.body;
        out += j.dump() + "\n";
        ++kept;
      }
      continue;
    }
    auto sh = select_social_history(sections, social);
    if (!sh || text::trim(sh->body).empty()) continue;
    Corpus one;
    AnnotatedDocument d;
    d.document = note.document;
    d.document.text = sh->body;
    one.docs.push_back(std::move(d));
    out += write_corpus_jsonl(one);
    ++kept;
  }
  write_text(a.out, out);
  *inv.out << "notes " << notes.docs.size() << ", " << (a.all_sections ? "sections " : "social history sections ")
           << kept << "\n";
  inv.manifest.inputs = {a.input};
  if (!a.rules.empty()) inv.manifest.inputs.push_back(a.rules);
  if (!a.social_rules.empty()) inv.manifest.inputs.push_back(a.social_rules);
  inv.manifest.outputs = {a.out};
}

struct SampleArgs {
  std::string corpus, schema, out;
  std::size_t n = 0;
  std::vector<std::size_t> splits;
  bool dedup = false;
  std::uint64_t seed = 0;
};

void cmd_sample(Invocation& inv, const SampleArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  Corpus c = load_corpus(a.corpus, schema);
  if (a.dedup) c = dedup_per_patient(c, derive_seed(a.seed, {"dedup"}));
  if (a.n > 0) c = sample_documents(c, a.n, derive_seed(a.seed, {"sample"}));
  if (!a.splits.empty()) {
    if (a.splits.size() != 3) throw CLI::ValidationError("--splits", "expects train,validation,test sizes");
    c = split_corpus(c, SplitSizes{a.splits[0], a.splits[1], a.splits[2]}, derive_seed(a.seed, {"split"}));
  }
  write_text(a.out, write_corpus_jsonl(c));
  *inv.out << "documents " << c.docs.size() << "\n";
  inv.manifest.seeds["seed"] = a.seed;
  inv.manifest.inputs = {a.corpus};
  inv.manifest.outputs = {a.out};
}

struct SyntheticArgs {
  std::string schema, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> splits;
};

void cmd_synthetic(Invocation& inv, const SyntheticArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  Corpus c = generate_synthetic(schema, a.n, a.seed);
  if (!a.splits.empty()) {
    if (a.splits.size() != 3) throw CLI::ValidationError("--splits", "expects train,validation,test sizes");
    c = split_corpus(c, SplitSizes{a.splits[0], a.splits[1], a.splits[2]}, derive_seed(a.seed, {"split"}));
  }
  write_text(a.out, write_corpus_jsonl(c));
  *inv.out << "documents " << c.docs.size() << ", events " << c.event_count() << "\n";
  inv.manifest.seeds["seed"] = a.seed;
  if (!a.schema.empty()) inv.manifest.inputs = {a.schema};
  inv.manifest.outputs = {a.out};
}

Strategy strategy_flag(const std::string& s) {
  auto v = parse_strategy(s);
  if (!v) throw CLI::ValidationError("--strategy", "must be event, 2sqa-base, 2sqa-guide or 2sqa-guide3shot");
  return *v;
}

struct FinetuneArgs {
  std::string corpus, schema, strategy = "event", out;
};

void cmd_export_finetune(Invocation& inv, const FinetuneArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  const Strategy strategy = strategy_flag(a.strategy);
  const Corpus c = load_corpus(a.corpus, schema);
  const auto pairs = finetune_pairs(c, schema, strategy);
  write_text(a.out, finetune_jsonl(pairs));
  *inv.out << "pairs " << pairs.size() << "\n";
  inv.manifest.inputs = {a.corpus};
  inv.manifest.outputs = {a.out};
}

struct PlannerArgs {
  std::string schema, strategy = "2sqa-base", train, guide_file;
  std::uint64_t seed = 0;
};

/// Loads the few-shot / example pool: --train if given, else the input's
/// train split, else the input itself (the target document is always excluded).
struct PlannerInputs {
  Schema schema;
  Strategy strategy = Strategy::Event;
  Corpus train;
  std::optional<GuideBook> guide;
};

PlannerInputs planner_inputs(const PlannerArgs& a, const Corpus& input, const Schema& schema) {
  PlannerInputs p;
  p.schema = schema;
  p.strategy = strategy_flag(a.strategy);
  if (!a.train.empty()) {
    p.train = load_corpus(a.train, schema);
  } else {
    p.train = input.subset(Split::Train);
    if (p.train.docs.empty()) p.train = input;
  }
  if (prompt_mode(p.strategy) != PromptMode::Base) {
    p.guide = a.guide_file.empty() ? GuideBook::bundled() : GuideBook::load(a.guide_file);
  }
  return p;
}

struct ExtractArgs {
  PlannerArgs planner;
  std::string corpus, out, mock_script;
  ClientConfig client;
  bool repair = false;
  double max_norm_dist = 0.2;
  std::size_t threads = 1;
  std::string split;
};

void cmd_extract(Invocation& inv, ExtractArgs a) {
  const Schema schema = load_schema_opt(a.planner.schema);
  const Corpus all = load_corpus(a.corpus, schema);
  Corpus input = all;
  if (!a.split.empty()) {
    auto s = parse_split(a.split);
    if (!s) throw CLI::ValidationError("--split", "must be train, validation or test");
    input = all.subset(*s);
  }
  const PlannerInputs p = planner_inputs(a.planner, all, schema);

  a.client.log_text = inv.unsafe_show_text;
  std::shared_ptr<Transport> transport;
  if (!a.mock_script.empty()) {
    transport = std::make_shared<ScriptedTransport>(Script::load(a.mock_script));
  } else {
    transport = std::make_shared<HttpTransport>(a.client);
  }
  std::ostream& err = *inv.err;
  Client client(a.client, transport, {}, [&err](std::string_view line) { err << line << "\n"; });

  PipelineOptions opts;
  opts.strategy = p.strategy;
  opts.seed = a.planner.seed;
  opts.repair = RepairPolicy{a.repair, a.max_norm_dist};
  opts.train = &p.train;
  opts.guide = p.guide ? &*p.guide : nullptr;
  opts.threads = a.threads;
  const PipelineResult r = run_pipeline(input, schema, client, opts);

  write_text(a.out, write_corpus_jsonl(r.predictions));
  write_text(a.out + ".metrics.json", r.metrics.to_json().dump(2) + "\n");
  *inv.out << "documents " << r.metrics.documents << ", queries " << r.metrics.total_queries() << ", events "
           << r.metrics.predicted_events << ", failures " << r.metrics.failures.size() << "\n"
           << "invalid rate: trigger " << r.metrics.invalid.trigger_rate() << ", argument "
           << r.metrics.invalid.argument_rate() << "\n";
  inv.manifest.seeds["seed"] = a.planner.seed;
  inv.manifest.inputs = {a.corpus};
  if (!a.planner.train.empty()) inv.manifest.inputs.push_back(a.planner.train);
  if (!a.planner.guide_file.empty()) inv.manifest.inputs.push_back(a.planner.guide_file);
  if (!a.mock_script.empty()) inv.manifest.inputs.push_back(a.mock_script);
  inv.manifest.outputs = {a.out, a.out + ".metrics.json"};
}

struct OracleArgs {
  PlannerArgs planner;
  std::string gold, out, split;
};

void cmd_oracle_script(Invocation& inv, const OracleArgs& a) {
  const Schema schema = load_schema_opt(a.planner.schema);
  const Corpus all = load_corpus(a.gold, schema);
  Corpus input = all;
  if (!a.split.empty()) {
    auto s = parse_split(a.split);
    if (!s) throw CLI::ValidationError("--split", "must be train, validation or test");
    input = all.subset(*s);
  }
  const PlannerInputs p = planner_inputs(a.planner, all, schema);
  const PromptPlanner planner(schema, p.strategy, a.planner.seed, &p.train, p.guide ? &*p.guide : nullptr);
  const Script script = build_oracle_script(input, planner);
  write_text(a.out, script.to_json());
  *inv.out << "prompts " << script.responses.size() << "\n";
  inv.manifest.seeds["seed"] = a.planner.seed;
  inv.manifest.inputs = {a.gold};
  if (!a.planner.train.empty()) inv.manifest.inputs.push_back(a.planner.train);
  if (!a.planner.guide_file.empty()) inv.manifest.inputs.push_back(a.planner.guide_file);
  inv.manifest.outputs = {a.out};
}

struct BratImportArgs {
  std::string dir, schema, out;
};

void cmd_brat_import(Invocation& inv, const BratImportArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  std::vector<brat::DocumentWarning> warnings;
  const Corpus c = brat::import_dir(a.dir, schema, &warnings);
  write_text(a.out, write_corpus_jsonl(c));
  for (const auto& w : warnings) {
    *inv.err << "warning: " << w.doc_id;
    if (w.warning.line) *inv.err << " line " << w.warning.line;
    *inv.err << ": " << w.warning.message << "\n";
  }
  *inv.out << "documents " << c.docs.size() << ", events " << c.event_count() << ", warnings " << warnings.size()
           << "\n";
  inv.manifest.inputs = {a.dir};
  inv.manifest.outputs = {a.out};
}

struct BratExportArgs {
  std::string corpus, schema, dir;
};

void cmd_brat_export(Invocation& inv, const BratExportArgs& a) {
  const Schema schema = load_schema_opt(a.schema);
  const Corpus c = load_corpus(a.corpus, schema);
  brat::export_dir(c, a.dir);
  *inv.out << "documents " << c.docs.size() << "\n";
  inv.manifest.inputs = {a.corpus};
  inv.manifest.outputs = {a.dir};
}

void add_planner_flags(CLI::App* sub, PlannerArgs& p) {
  sub->add_option("--schema", p.schema, "Schema JSON (default: bundled)");
  sub->add_option("--strategy", p.strategy, "event, 2sqa-base, 2sqa-guide or 2sqa-guide3shot")->capture_default_str();
  sub->add_option("--seed", p.seed, "Seed for example sampling")->required();
  sub->add_option("--train", p.train, "Corpus supplying in-context examples");
  sub->add_option("--guide-file", p.guide_file, "Guide text for the guide strategies (default: bundled)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SDoH event extraction harness", "sdoh"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SDOH_TOOL_VERSION);
  bool unsafe = false;
  app.add_flag("--unsafe-show-text", unsafe, "Allow note, prompt and completion text in diagnostics");

  std::map<CLI::App*, Handler> handlers;

  ScoreArgs score_a;
  auto* s = app.add_subcommand("score", "Score predictions against gold");
  s->add_option("--gold", score_a.gold)->required();
  s->add_option("--pred", score_a.pred)->required();
  s->add_option("--schema", score_a.schema);
  s->add_option("--level", score_a.level, "trigger, argument, event or all")->capture_default_str();
  s->add_option("--split", score_a.split, "Score only gold documents of this split");
  s->add_option("--out", score_a.out, "Output prefix for .json and .txt")->required();
  handlers[s] = [&](Invocation& i) { cmd_score(i, score_a); };

  IaaArgs iaa_a;
  s = app.add_subcommand("iaa", "Inter-annotator agreement of two annotation sets");
  s->add_option("--a", iaa_a.a, "First annotator (JSONL or BRAT directory)")->required();
  s->add_option("--b", iaa_a.b, "Second annotator")->required();
  s->add_option("--schema", iaa_a.schema);
  s->add_option("--out", iaa_a.out, "Output prefix")->required();
  handlers[s] = [&](Invocation& i) { cmd_iaa(i, iaa_a); };

  SignificanceArgs sig_a;
  s = app.add_subcommand("significance", "Paired bootstrap test of two systems");
  s->add_option("--gold", sig_a.gold)->required();
  s->add_option("--pred-a", sig_a.pred_a)->required();
  s->add_option("--pred-b", sig_a.pred_b)->required();
  s->add_option("--schema", sig_a.schema);
  s->add_option("--level", sig_a.level)->capture_default_str();
  s->add_option("--key", sig_a.key, "Per-key or report-group row instead of the micro average");
  s->add_flag("--combined", sig_a.combined, "Pool trigger and argument counts");
  s->add_option("--resamples", sig_a.resamples)->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sig_a.seed)->required();
  s->add_option("--threads", sig_a.threads)->capture_default_str();
  s->add_option("--out", sig_a.out, "Result JSON path")->required();
  handlers[s] = [&](Invocation& i) { cmd_significance(i, sig_a); };

  SectionsArgs sec_a;
  s = app.add_subcommand("sections", "Extract social history sections from raw notes");
  s->add_option("--input", sec_a.input, "Notes in corpus JSONL layout")->required();
  s->add_option("--rules", sec_a.rules, "Heading rules JSON");
  s->add_option("--social-rules", sec_a.social_rules, "Social history heading rules JSON");
  s->add_flag("--all-sections", sec_a.all_sections, "Emit every section instead of one corpus record per note");
  s->add_option("--out", sec_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_sections(i, sec_a); };

  SampleArgs samp_a;
  s = app.add_subcommand("sample", "Deduplicate, sample and split a corpus");
  s->add_option("--corpus", samp_a.corpus)->required();
  s->add_option("--schema", samp_a.schema);
  s->add_option("--n", samp_a.n, "Number of documents to keep");
  s->add_option("--splits", samp_a.splits, "train,validation,test sizes")->delimiter(',');
  s->add_flag("--dedup-patient", samp_a.dedup, "Keep one document per patient first");
  s->add_option("--seed", samp_a.seed)->required();
  s->add_option("--out", samp_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_sample(i, samp_a); };

  SyntheticArgs syn_a;
  s = app.add_subcommand("synthetic", "Generate a synthetic annotated corpus");
  s->add_option("--schema", syn_a.schema);
  s->add_option("--n", syn_a.n)->required();
  s->add_option("--seed", syn_a.seed)->required();
  s->add_option("--splits", syn_a.splits, "train,validation,test sizes")->delimiter(',');
  s->add_option("--out", syn_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_synthetic(i, syn_a); };

  FinetuneArgs ft_a;
  s = app.add_subcommand("export-finetune", "Write input/target supervision pairs");
  s->add_option("--corpus", ft_a.corpus)->required();
  s->add_option("--schema", ft_a.schema);
  s->add_option("--strategy", ft_a.strategy)->capture_default_str();
  s->add_option("--out", ft_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_export_finetune(i, ft_a); };

  ExtractArgs ex_a;
  s = app.add_subcommand("extract", "Run an extraction strategy through a chat endpoint or mock");
  s->add_option("--corpus", ex_a.corpus)->required();
  add_planner_flags(s, ex_a.planner);
  s->add_option("--split", ex_a.split, "Only extract documents of this split");
  s->add_option("--mock-script", ex_a.mock_script, "Answer from a scripted mock instead of the endpoint");
  s->add_option("--base-url", ex_a.client.base_url)->capture_default_str();
  s->add_option("--endpoint-path", ex_a.client.endpoint_path)->capture_default_str();
  s->add_option("--api-key-env", ex_a.client.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  s->add_option("--model", ex_a.client.model_name);
  s->add_option("--max-tokens", ex_a.client.max_tokens)->capture_default_str();
  s->add_option("--temperature", ex_a.client.temperature)->capture_default_str();
  s->add_option("--timeout", ex_a.client.request_timeout, "Request timeout in seconds")->capture_default_str();
  s->add_option("--max-retries", ex_a.client.max_retries)->capture_default_str();
  s->add_option("--max-concurrent", ex_a.client.max_concurrent)->capture_default_str();
  s->add_flag("--repair", ex_a.repair, "Repair spans that do not match the note exactly");
  s->add_option("--max-norm-dist", ex_a.max_norm_dist)->capture_default_str();
  s->add_option("--threads", ex_a.threads, "Documents processed concurrently")->capture_default_str();
  s->add_option("--out", ex_a.out, "Prediction corpus JSONL")->required();
  handlers[s] = [&](Invocation& i) { cmd_extract(i, ex_a); };

  OracleArgs or_a;
  s = app.add_subcommand("oracle-script", "Mock script answering every prompt from gold");
  s->add_option("--gold", or_a.gold)->required();
  add_planner_flags(s, or_a.planner);
  s->add_option("--split", or_a.split, "Only script documents of this split");
  s->add_option("--out", or_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_oracle_script(i, or_a); };

  BratImportArgs bi_a;
  s = app.add_subcommand("brat-import", "Read a BRAT directory into corpus JSONL");
  s->add_option("--dir", bi_a.dir)->required();
  s->add_option("--schema", bi_a.schema);
  s->add_option("--out", bi_a.out)->required();
  handlers[s] = [&](Invocation& i) { cmd_brat_import(i, bi_a); };

  BratExportArgs be_a;
  s = app.add_subcommand("brat-export", "Write a corpus as BRAT .txt/.ann files");
  s->add_option("--corpus", be_a.corpus)->required();
  s->add_option("--schema", be_a.schema);
  s->add_option("--dir", be_a.dir)->required();
  handlers[s] = [&](Invocation& i) { cmd_brat_export(i, be_a); };

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << SDOH_TOOL_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Invocation inv;
  inv.out = &out;
  inv.err = &err;
  inv.unsafe_show_text = unsafe;
  inv.manifest.command = sub->get_name();
  inv.manifest.tool_version = SDOH_TOOL_VERSION;
  record_options(*sub, inv.manifest);
  if (unsafe) inv.manifest.options["unsafe-show-text"] = "true";

  try {
    handlers.at(sub)(inv);
    inv.manifest.timestamp = utc_timestamp();
    write_manifest(inv.manifest, inv.manifest_base.empty() ? inv.manifest.outputs.front() : inv.manifest_base);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kTransport;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace sdoh::cli
