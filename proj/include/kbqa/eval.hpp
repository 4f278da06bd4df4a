#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbqa/errors.hpp"
#include "kbqa/grounding.hpp"
#include "kbqa/sexpr.hpp"

namespace kbqa {

enum class GenLevel { Iid, Compositional, ZeroShot };

std::string_view to_string(GenLevel level);

struct EvalRecord {
  std::string qid;
  std::string question;
  std::optional<std::string> gold_sexpr;
  std::set<std::string> gold_answers;
  std::optional<GenLevel> level;
};

enum class DatasetFormat { GrailQa, WebQsp, GraphQ, Fixture };

std::optional<DatasetFormat> dataset_format_from_string(std::string_view s);

/// Normalizes a dataset file into EvalRecords. Fixture files are
/// line-delimited JSON ({"qid","question","sexpr"?,"answers","level"?});
/// the three public formats are read from their published layouts.
std::vector<EvalRecord> load_dataset(const std::filesystem::path& path,
                                     DatasetFormat format);

void write_fixture_dataset(const std::filesystem::path& path,
                           const std::vector<EvalRecord>& records);

/// Set F1: 2|P∩G| / (|P|+|G|). Both empty scores 1; an absent prediction
/// scores 0.
double score_f1(const std::optional<AnswerSet>& pred, const AnswerSet& gold);

/// Logical-form exact match on canonical prints after normalization
/// (AND operand chains flattened and sorted, literals normalized).
bool score_em(const SExprPtr& pred, const SExpr& gold);

SExprPtr normalize_for_em(const SExpr& expr);

/// Fraction of questions whose every sample failed the format check.
double score_fer(const std::vector<AnswerRecord>& records);

struct LevelMetrics {
  std::size_t n = 0;
  double em = 0.0;
  double f1 = 0.0;
  double fer = 0.0;
  double em_denotation = 0.0;
};

struct MetricsReport {
  std::size_t n = 0;
  double fer = 0.0;
  double em = 0.0;   // logical-form match; the headline EM
  double f1 = 0.0;
  double em_denotation = 0.0;
  std::size_t em_denominator = 0;  // records with a gold logical form
  std::map<GenLevel, LevelMetrics> per_level;

  // Present when aggregating repeated runs.
  std::size_t runs = 1;
  std::optional<double> fer_std, em_std, f1_std;
};

/// Joins answer records to dataset records by qid and scores them. Missing
/// qids raise ParseError; absent predictions stay in every denominator.
MetricsReport compute_metrics(const std::vector<AnswerRecord>& answers,
                              const std::vector<EvalRecord>& dataset);

/// Mean and standard deviation over repeated runs of the same dataset.
MetricsReport aggregate_runs(const std::vector<MetricsReport>& runs);

std::string render_report_text(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

// Answer-record persistence (line-delimited JSON, stable field order).
void write_answer_records(const std::filesystem::path& path,
                          const std::vector<AnswerRecord>& records);
std::vector<AnswerRecord> read_answer_records(const std::filesystem::path& path);
std::string answer_record_to_json(const AnswerRecord& record);

}  // namespace kbqa
