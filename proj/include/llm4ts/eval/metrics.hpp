#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "llm4ts/corpus/corpus.hpp"
#include "llm4ts/errors.hpp"
#include "llm4ts/judge/judge.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::eval {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

// Binary classification report for a judge. The positive ("send") class is
// can-walk. Confusion counts: rows = true {send, don't-send}, columns =
// predicted {send, don't-send}, i.e. [[tp, fn], [fp, tn]].
struct EvalMetrics {
  long tp = 0, fn = 0, fp = 0, tn = 0;
  double accuracy = 0.0;
  ClassMetrics send;
  ClassMetrics dont_send;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  bool zero_division = false;  // set when any rate had a 0/0 denominator

  long n() const { return tp + fn + fp + tn; }
};

inline EvalMetrics confusion_to_metrics(long tp, long fn, long fp, long tn) {
  if (tp < 0 || fn < 0 || fp < 0 || tn < 0)
    throw ValidationError("confusion counts must be non-negative");
  EvalMetrics m;
  m.tp = tp;
  m.fn = fn;
  m.fp = fp;
  m.tn = tn;
  const long n = m.n();
  if (n == 0) throw EmptyInput("confusion matrix is empty");

  auto rate = [&m](long num, long den) {
    if (den == 0) {
      m.zero_division = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  auto f1_of = [&m](double p, double r) {
    if (p + r == 0.0) {
      m.zero_division = true;
      return 0.0;
    }
    return 2.0 * p * r / (p + r);
  };

  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(n);

  m.send.support = tp + fn;
  m.send.precision = rate(tp, tp + fp);
  m.send.recall = rate(tp, tp + fn);
  m.send.f1 = f1_of(m.send.precision, m.send.recall);

  m.dont_send.support = fp + tn;
  m.dont_send.precision = rate(tn, tn + fn);
  m.dont_send.recall = rate(tn, tn + fp);
  m.dont_send.f1 = f1_of(m.dont_send.precision, m.dont_send.recall);

  m.macro_precision = 0.5 * (m.send.precision + m.dont_send.precision);
  m.macro_recall = 0.5 * (m.send.recall + m.dont_send.recall);
  m.macro_f1 = 0.5 * (m.send.f1 + m.dont_send.f1);

  const double ws = static_cast<double>(m.send.support) / static_cast<double>(n);
  const double wd = static_cast<double>(m.dont_send.support) / static_cast<double>(n);
  m.weighted_precision = ws * m.send.precision + wd * m.dont_send.precision;
  m.weighted_recall = ws * m.send.recall + wd * m.dont_send.recall;
  m.weighted_f1 = ws * m.send.f1 + wd * m.dont_send.f1;
  return m;
}

// Samples n_per_label descriptions per pool (uniformly, with replacement),
// asks the judge about each with a minimal context (no history), and scores
// the verdicts against the generating labels. An llm judge renders whatever
// prompt components it was constructed with; the standard validation setup
// is BFQ.
inline EvalMetrics validate_judge(judge::Judge& j, const corpus::Corpus& corpus,
                                  int n_per_label, Rng& rng) {
  if (n_per_label < 1) throw ValidationError("validate_judge: n_per_label must be >= 1");
  long tp = 0, fn = 0, fp = 0, tn = 0;
  for (int i = 0; i < n_per_label; ++i) {
    for (const corpus::WalkLabel label :
         {corpus::WalkLabel::can_walk, corpus::WalkLabel::cannot_walk}) {
      judge::JudgeRequest req;
      req.t = i;
      req.description = {i, corpus::sample_pool(corpus.pool(label), rng), label};
      req.context.description = req.description.text;
      const judge::JudgeDecision d = j.decide(req);
      const bool predicted_send = d.verdict == judge::Verdict::allow;
      const bool true_send = label == corpus::WalkLabel::can_walk;
      if (true_send && predicted_send) ++tp;
      if (true_send && !predicted_send) ++fn;
      if (!true_send && predicted_send) ++fp;
      if (!true_send && !predicted_send) ++tn;
    }
  }
  return confusion_to_metrics(tp, fn, fp, tn);
}

inline std::string format_report(const EvalMetrics& m) {
  std::string s;
  s += "confusion (rows: true send / don't-send, cols: predicted send / don't-send)\n";
  s += "  [[" + std::to_string(m.tp) + ", " + std::to_string(m.fn) + "],\n";
  s += "   [" + std::to_string(m.fp) + ", " + std::to_string(m.tn) + "]]\n";
  s += "n          " + std::to_string(m.n()) + "\n";
  s += "accuracy   " + fmt_fixed(m.accuracy, 3) + "\n";
  auto cls = [](const char* name, const ClassMetrics& c) {
    return std::string(name) + "  precision " + fmt_fixed(c.precision, 3) + "  recall " +
           fmt_fixed(c.recall, 3) + "  f1 " + fmt_fixed(c.f1, 3) + "  support " +
           std::to_string(c.support) + "\n";
  };
  s += cls("send      ", m.send);
  s += cls("dont_send ", m.dont_send);
  s += "macro      precision " + fmt_fixed(m.macro_precision, 3) + "  recall " +
       fmt_fixed(m.macro_recall, 3) + "  f1 " + fmt_fixed(m.macro_f1, 3) + "\n";
  s += "weighted   precision " + fmt_fixed(m.weighted_precision, 3) + "  recall " +
       fmt_fixed(m.weighted_recall, 3) + "  f1 " + fmt_fixed(m.weighted_f1, 3) + "\n";
  if (m.zero_division) s += "note: some rates had empty denominators and were reported as 0\n";
  return s;
}

inline nlohmann::ordered_json metrics_to_json(const EvalMetrics& m) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::ordered_json{{"precision", c.precision},
                                  {"recall", c.recall},
                                  {"f1", c.f1},
                                  {"support", c.support}};
  };
  return nlohmann::ordered_json{
      {"confusion", {{m.tp, m.fn}, {m.fp, m.tn}}},
      {"n", m.n()},
      {"accuracy", m.accuracy},
      {"send", cls(m.send)},
      {"dont_send", cls(m.dont_send)},
      {"macro",
       {{"precision", m.macro_precision}, {"recall", m.macro_recall}, {"f1", m.macro_f1}}},
      {"weighted",
       {{"precision", m.weighted_precision},
        {"recall", m.weighted_recall},
        {"f1", m.weighted_f1}}},
      {"zero_division", m.zero_division},
  };
}

}  // namespace llm4ts::eval
