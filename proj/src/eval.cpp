#include "kbqa/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace kbqa {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(GenLevel level) {
  switch (level) {
    case GenLevel::Iid: return "i.i.d.";
    case GenLevel::Compositional: return "compositional";
    case GenLevel::ZeroShot: return "zero-shot";
  }
  return "";
}

namespace {

std::optional<GenLevel> level_from_string(std::string_view s) {
  if (s == "i.i.d." || s == "iid" || s == "i.i.d") return GenLevel::Iid;
  if (s == "compositional") return GenLevel::Compositional;
  if (s == "zero-shot" || s == "zero_shot" || s == "zeroshot")
    return GenLevel::ZeroShot;
  return std::nullopt;
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw ParseError("file is not valid JSON", path.string(), 0);
  return doc;
}

std::string answer_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer())
    return std::to_string(value.get<long long>());
  if (value.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value.get<double>());
    return buf;
  }
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return value.dump();
}

std::vector<EvalRecord> load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  std::vector<EvalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("qid") || !row.contains("question"))
      throw ParseError("expected {\"qid\",\"question\",...}", path.string(),
                       line_no);
    EvalRecord rec;
    rec.qid = row["qid"].get<std::string>();
    rec.question = row["question"].get<std::string>();
    if (row.contains("sexpr") && !row["sexpr"].is_null())
      rec.gold_sexpr = row["sexpr"].get<std::string>();
    if (row.contains("answers"))
      for (const json& a : row["answers"]) rec.gold_answers.insert(answer_to_string(a));
    if (rec.gold_answers.empty() && !rec.gold_sexpr)
      throw ParseError("record '" + rec.qid +
                           "' has neither answers nor a gold logical form",
                       path.string(), line_no);
    if (row.contains("level") && !row["level"].is_null()) {
      rec.level = level_from_string(row["level"].get<std::string>());
      if (!rec.level)
        throw ParseError("unknown level for '" + rec.qid + "'", path.string(),
                         line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<EvalRecord> load_grailqa(const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  if (!doc.is_array()) throw ParseError("expected a JSON array", path.string(), 0);
  std::vector<EvalRecord> records;
  for (const json& row : doc) {
    EvalRecord rec;
    rec.qid = answer_to_string(row.value("qid", json("?")));
    try {
      rec.question = row.at("question").get<std::string>();
      if (row.contains("s_expression") && !row["s_expression"].is_null())
        rec.gold_sexpr = row["s_expression"].get<std::string>();
      for (const json& a : row.value("answer", json::array())) {
        if (a.is_object())
          rec.gold_answers.insert(answer_to_string(a.at("answer_argument")));
        else
          rec.gold_answers.insert(answer_to_string(a));
      }
      if (row.contains("level"))
        rec.level = level_from_string(row["level"].get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError("bad record qid=" + rec.qid + ": " + e.what(),
                       path.string(), 0);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<EvalRecord> load_webqsp(const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  const json& questions = doc.contains("Questions") ? doc["Questions"] : doc;
  if (!questions.is_array())
    throw ParseError("expected a Questions array", path.string(), 0);
  std::vector<EvalRecord> records;
  for (const json& row : questions) {
    EvalRecord rec;
    rec.qid = answer_to_string(row.value("QuestionId", json("?")));
    try {
      rec.question = row.contains("ProcessedQuestion")
                         ? row["ProcessedQuestion"].get<std::string>()
                         : row.at("RawQuestion").get<std::string>();
      // Answers come from the first parse, the dataset's primary annotation.
      const json& parses = row.value("Parses", json::array());
      if (!parses.empty())
        for (const json& a : parses[0].value("Answers", json::array()))
          rec.gold_answers.insert(answer_to_string(a.at("AnswerArgument")));
    } catch (const json::exception& e) {
      throw ParseError("bad record qid=" + rec.qid + ": " + e.what(),
                       path.string(), 0);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<EvalRecord> load_graphq(const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  if (!doc.is_array()) throw ParseError("expected a JSON array", path.string(), 0);
  std::vector<EvalRecord> records;
  for (const json& row : doc) {
    EvalRecord rec;
    rec.qid = answer_to_string(row.value("qid", json("?")));
    try {
      rec.question = row.at("question").get<std::string>();
      for (const json& a : row.value("answer", json::array()))
        rec.gold_answers.insert(answer_to_string(a));
    } catch (const json::exception& e) {
      throw ParseError("bad record qid=" + rec.qid + ": " + e.what(),
                       path.string(), 0);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::optional<DatasetFormat> dataset_format_from_string(std::string_view s) {
  if (s == "grailqa") return DatasetFormat::GrailQa;
  if (s == "webqsp") return DatasetFormat::WebQsp;
  if (s == "graphq") return DatasetFormat::GraphQ;
  if (s == "fixture") return DatasetFormat::Fixture;
  return std::nullopt;
}

std::vector<EvalRecord> load_dataset(const std::filesystem::path& path,
                                     DatasetFormat format) {
  switch (format) {
    case DatasetFormat::Fixture: return load_fixture(path);
    case DatasetFormat::GrailQa: return load_grailqa(path);
    case DatasetFormat::WebQsp: return load_webqsp(path);
    case DatasetFormat::GraphQ: return load_graphq(path);
  }
  throw ParseError("unknown dataset format");
}

void write_fixture_dataset(const std::filesystem::path& path,
                           const std::vector<EvalRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing", path.string(), 0);
  for (const EvalRecord& rec : records) {
    ordered_json row;
    row["qid"] = rec.qid;
    row["question"] = rec.question;
    if (rec.gold_sexpr) row["sexpr"] = *rec.gold_sexpr;
    row["answers"] = rec.gold_answers;
    if (rec.level) row["level"] = to_string(*rec.level);
    out << row.dump() << '\n';
  }
}

double score_f1(const std::optional<AnswerSet>& pred, const AnswerSet& gold) {
  if (!pred) return 0.0;
  if (pred->empty() && gold.empty()) return 1.0;
  if (pred->empty() || gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (const std::string& p : *pred)
    if (gold.count(p)) ++hits;
  return 2.0 * static_cast<double>(hits) /
         static_cast<double>(pred->size() + gold.size());
}

namespace {

std::string normalize_literal_text(const LiteralVal& lit) {
  switch (lit.datatype) {
    case Datatype::Integer: {
      long long value = 0;
      auto [ptr, ec] =
          std::from_chars(lit.text.data(), lit.text.data() + lit.text.size(), value);
      if (ec == std::errc{} && ptr == lit.text.data() + lit.text.size())
        return std::to_string(value);
      return lit.text;
    }
    case Datatype::Float: {
      try {
        double value = std::stod(lit.text);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g", value);
        return buf;
      } catch (...) {
        return lit.text;
      }
    }
    case Datatype::Datetime: {
      std::string t = lit.text;
      while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
      while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.pop_back();
      return t;
    }
    case Datatype::Plain:
      return lit.text;
  }
  return lit.text;
}

void flatten_and(const SExprPtr& e, std::vector<SExprPtr>& operands) {
  if (const auto* a = e->get_if<And>()) {
    flatten_and(a->lhs, operands);
    flatten_and(a->rhs, operands);
  } else {
    operands.push_back(normalize_for_em(*e));
  }
}

}  // namespace

SExprPtr normalize_for_em(const SExpr& expr) {
  return std::visit(
      [&](const auto& n) -> SExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityRef>) {
          return make_entity(n.name);
        } else if constexpr (std::is_same_v<T, LiteralVal>) {
          return make_literal(normalize_literal_text(n), n.datatype);
        } else if constexpr (std::is_same_v<T, Join>) {
          return make_join(n.relation, normalize_for_em(*n.sub));
        } else if constexpr (std::is_same_v<T, And>) {
          // Intersection is order-free: flatten, sort by print, rebuild.
          std::vector<SExprPtr> operands;
          flatten_and(n.lhs, operands);
          flatten_and(n.rhs, operands);
          std::sort(operands.begin(), operands.end(),
                    [](const SExprPtr& a, const SExprPtr& b) {
                      return print_sexpr(a) < print_sexpr(b);
                    });
          SExprPtr acc = operands.front();
          for (std::size_t i = 1; i < operands.size(); ++i)
            acc = make_and(acc, operands[i]);
          return acc;
        } else if constexpr (std::is_same_v<T, Cmp>) {
          return make_cmp(n.op, n.relation, normalize_for_em(*n.value));
        } else if constexpr (std::is_same_v<T, Arg>) {
          return make_arg(n.op, normalize_for_em(*n.sub), n.relation);
        } else {
          return make_count(normalize_for_em(*n.sub));
        }
      },
      expr.node());
}

bool score_em(const SExprPtr& pred, const SExpr& gold) {
  if (!pred) return false;
  return print_sexpr(normalize_for_em(*pred)) ==
         print_sexpr(normalize_for_em(gold));
}

namespace {

bool all_samples_malformed(const AnswerRecord& record) {
  if (record.samples.empty()) return true;
  return std::all_of(record.samples.begin(), record.samples.end(),
                     [](const SampleOutcome& s) {
                       return s.verdict == "format_error";
                     });
}

}  // namespace

double score_fer(const std::vector<AnswerRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t errors = 0;
  for (const AnswerRecord& r : records)
    if (all_samples_malformed(r)) ++errors;
  return static_cast<double>(errors) / static_cast<double>(records.size());
}

MetricsReport compute_metrics(const std::vector<AnswerRecord>& answers,
                              const std::vector<EvalRecord>& dataset) {
  std::map<std::string, const EvalRecord*> by_qid;
  for (const EvalRecord& rec : dataset) by_qid[rec.qid] = &rec;

  struct Tally {
    std::size_t n = 0, em_hits = 0, em_denom = 0, den_hits = 0, fer_hits = 0;
    double f1_sum = 0.0;
  };
  Tally overall;
  std::map<GenLevel, Tally> levels;

  for (const AnswerRecord& answer : answers) {
    auto it = by_qid.find(answer.qid);
    if (it == by_qid.end())
      throw ParseError("answer record qid '" + answer.qid +
                       "' not present in the dataset");
    const EvalRecord& gold = *it->second;

    double f1 = score_f1(answer.final_answer, gold.gold_answers);
    bool fer = all_samples_malformed(answer);
    bool den = answer.final_answer && *answer.final_answer == gold.gold_answers;

    bool has_gold_expr = gold.gold_sexpr.has_value();
    bool em = false;
    if (has_gold_expr) {
      SExprPtr gold_expr = parse_sexpr(*gold.gold_sexpr);
      SExprPtr pred_expr;
      if (answer.final_expr) {
        try {
          pred_expr = parse_sexpr(*answer.final_expr);
        } catch (...) {
          pred_expr = nullptr;
        }
      }
      em = score_em(pred_expr, *gold_expr);
    }

    auto apply = [&](Tally& t) {
      t.n += 1;
      t.f1_sum += f1;
      if (fer) t.fer_hits += 1;
      if (den) t.den_hits += 1;
      if (has_gold_expr) {
        t.em_denom += 1;
        if (em) t.em_hits += 1;
      }
    };
    apply(overall);
    if (gold.level) apply(levels[*gold.level]);
  }

  auto to_metrics = [](const Tally& t) {
    LevelMetrics m;
    m.n = t.n;
    m.f1 = t.n ? t.f1_sum / static_cast<double>(t.n) : 0.0;
    m.fer = t.n ? static_cast<double>(t.fer_hits) / static_cast<double>(t.n) : 0.0;
    m.em = t.em_denom ? static_cast<double>(t.em_hits) /
                            static_cast<double>(t.em_denom)
                      : 0.0;
    m.em_denotation =
        t.n ? static_cast<double>(t.den_hits) / static_cast<double>(t.n) : 0.0;
    return m;
  };

  MetricsReport report;
  LevelMetrics m = to_metrics(overall);
  report.n = m.n;
  report.em = m.em;
  report.f1 = m.f1;
  report.fer = m.fer;
  report.em_denotation = m.em_denotation;
  report.em_denominator = overall.em_denom;
  for (const auto& [level, tally] : levels) report.per_level[level] = to_metrics(tally);
  return report;
}

MetricsReport aggregate_runs(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  if (runs.size() == 1) return runs.front();

  MetricsReport out;
  out.runs = runs.size();
  out.n = runs.front().n;
  double fer = 0, em = 0, f1 = 0, den = 0;
  for (const MetricsReport& r : runs) {
    fer += r.fer;
    em += r.em;
    f1 += r.f1;
    den += r.em_denotation;
  }
  const double k = static_cast<double>(runs.size());
  out.fer = fer / k;
  out.em = em / k;
  out.f1 = f1 / k;
  out.em_denotation = den / k;
  out.em_denominator = runs.front().em_denominator;

  auto sample_std = [&](double mean, auto getter) {
    double ss = 0;
    for (const MetricsReport& r : runs) {
      double d = getter(r) - mean;
      ss += d * d;
    }
    return std::sqrt(ss / (k - 1));
  };
  out.fer_std = sample_std(out.fer, [](const MetricsReport& r) { return r.fer; });
  out.em_std = sample_std(out.em, [](const MetricsReport& r) { return r.em; });
  out.f1_std = sample_std(out.f1, [](const MetricsReport& r) { return r.f1; });

  for (const auto& [level, metrics] : runs.front().per_level) {
    LevelMetrics m;
    m.n = metrics.n;
    for (const MetricsReport& r : runs) {
      auto it = r.per_level.find(level);
      if (it == r.per_level.end()) continue;
      m.em += it->second.em / k;
      m.f1 += it->second.f1 / k;
      m.fer += it->second.fer / k;
      m.em_denotation += it->second.em_denotation / k;
    }
    out.per_level[level] = m;
  }
  return out;
}

namespace {

std::string fmt_rate(double value, const std::optional<double>& std_dev) {
  char buf[64];
  if (std_dev)
    std::snprintf(buf, sizeof(buf), "%.3f(%.3f)", value, *std_dev);
  else
    std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

}  // namespace

std::string render_report_text(const MetricsReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-15s %6s %14s %14s %14s\n", "Level", "n",
                "EM", "F1", "FER");
  out += line;
  auto row = [&](const std::string& name, const LevelMetrics& m) {
    std::snprintf(line, sizeof(line), "%-15s %6zu %14s %14s %14s\n",
                  name.c_str(), m.n, fmt_rate(m.em, std::nullopt).c_str(),
                  fmt_rate(m.f1, std::nullopt).c_str(),
                  fmt_rate(m.fer, std::nullopt).c_str());
    out += line;
  };
  for (const auto& [level, metrics] : report.per_level)
    row(std::string(to_string(level)), metrics);
  std::snprintf(line, sizeof(line), "%-15s %6zu %14s %14s %14s\n", "overall",
                report.n, fmt_rate(report.em, report.em_std).c_str(),
                fmt_rate(report.f1, report.f1_std).c_str(),
                fmt_rate(report.fer, report.fer_std).c_str());
  out += line;
  return out;
}

std::string report_to_json(const MetricsReport& report) {
  ordered_json doc;
  doc["n"] = report.n;
  doc["runs"] = report.runs;
  doc["fer"] = report.fer;
  doc["em"] = report.em;
  doc["f1"] = report.f1;
  doc["em_denotation"] = report.em_denotation;
  doc["em_denominator"] = report.em_denominator;
  if (report.fer_std) doc["fer_std"] = *report.fer_std;
  if (report.em_std) doc["em_std"] = *report.em_std;
  if (report.f1_std) doc["f1_std"] = *report.f1_std;
  ordered_json levels = ordered_json::object();
  for (const auto& [level, m] : report.per_level) {
    ordered_json entry;
    entry["n"] = m.n;
    entry["em"] = m.em;
    entry["f1"] = m.f1;
    entry["fer"] = m.fer;
    entry["em_denotation"] = m.em_denotation;
    levels[std::string(to_string(level))] = entry;
  }
  doc["per_level"] = levels;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Answer-record persistence

std::string answer_record_to_json(const AnswerRecord& record) {
  ordered_json doc;
  doc["qid"] = record.qid;
  doc["question"] = record.question;
  if (!record.prompt.empty()) doc["prompt"] = record.prompt;
  ordered_json samples = ordered_json::array();
  for (const SampleOutcome& s : record.samples) {
    ordered_json sample;
    sample["raw_text"] = s.raw_text;
    sample["verdict"] = s.verdict;
    if (s.format_reason)
      sample["format_reason"] = std::string(to_string(*s.format_reason));
    if (s.callseq_text) sample["callseq"] = *s.callseq_text;
    if (s.grounded_expr) sample["grounded_expr"] = *s.grounded_expr;
    if (s.answer) sample["answer"] = *s.answer;
    sample["probes"] = s.probes;
    samples.push_back(std::move(sample));
  }
  doc["samples"] = std::move(samples);
  if (record.final_answer) doc["final_answer"] = *record.final_answer;
  if (record.final_expr) doc["final_expr"] = *record.final_expr;
  doc["probes_used"] = record.probes_used;
  return doc.dump();
}

void write_answer_records(const std::filesystem::path& path,
                          const std::vector<AnswerRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing", path.string(), 0);
  for (const AnswerRecord& record : records)
    out << answer_record_to_json(record) << '\n';
}

std::vector<AnswerRecord> read_answer_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  std::vector<AnswerRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded())
      throw ParseError("bad answer record", path.string(), line_no);
    AnswerRecord record;
    record.qid = row.value("qid", "");
    record.question = row.value("question", "");
    record.prompt = row.value("prompt", "");
    for (const json& s : row.value("samples", json::array())) {
      SampleOutcome outcome;
      outcome.raw_text = s.value("raw_text", "");
      outcome.verdict = s.value("verdict", "");
      if (s.contains("format_reason")) {
        const std::string reason = s["format_reason"].get<std::string>();
        for (FormatErrorReason r :
             {FormatErrorReason::NoStatements, FormatErrorReason::BadArity,
              FormatErrorReason::UnknownFunction, FormatErrorReason::UseBeforeDef,
              FormatErrorReason::MissingStop, FormatErrorReason::BadEnumArg,
              FormatErrorReason::TypeViolation})
          if (to_string(r) == reason) outcome.format_reason = r;
      }
      if (s.contains("callseq")) outcome.callseq_text = s["callseq"].get<std::string>();
      if (s.contains("grounded_expr"))
        outcome.grounded_expr = s["grounded_expr"].get<std::string>();
      if (s.contains("answer"))
        outcome.answer = s["answer"].get<std::set<std::string>>();
      outcome.probes = s.value("probes", 0ull);
      record.samples.push_back(std::move(outcome));
    }
    if (row.contains("final_answer"))
      record.final_answer = row["final_answer"].get<std::set<std::string>>();
    if (row.contains("final_expr"))
      record.final_expr = row["final_expr"].get<std::string>();
    record.probes_used = row.value("probes_used", 0ull);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace kbqa
