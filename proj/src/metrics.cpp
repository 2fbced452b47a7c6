#include "sludec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "sludec/errors.hpp"

namespace sludec {

namespace {

std::set<SemanticItem> as_set(const ItemSet& items) { return {items.begin(), items.end()}; }

ItemCounts count_turn(const std::set<SemanticItem>& pred, const std::set<SemanticItem>& ref) {
  ItemCounts c;
  for (const auto& p : pred) (ref.count(p) ? c.tp : c.fp)++;
  for (const auto& r : ref)
    if (!pred.count(r)) ++c.fn;
  return c;
}

// -log of the probability the decoder gave to the truth about one item.
double item_cross_entropy(bool in_reference, double confidence) {
  const double likelihood = in_reference ? confidence : 1.0 - confidence;
  return -std::log(std::clamp(likelihood, kIceClamp, 1.0));
}

}  // namespace

ItemCounts item_counts(const std::vector<ItemSet>& predicted, const std::vector<ItemSet>& reference) {
  if (predicted.size() != reference.size())
    throw DomainError("item_counts: " + std::to_string(predicted.size()) + " predicted turns vs " +
                      std::to_string(reference.size()) + " reference turns");
  ItemCounts total;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    const auto c = count_turn(as_set(predicted[u]), as_set(reference[u]));
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

PRF1 prf1(const ItemCounts& c) {
  PRF1 r;
  r.precision = (c.tp + c.fp) == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.recall = (c.tp + c.fn) == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

double joint_accuracy(const std::vector<HeadOutputs>& predicted,
                      const std::vector<HeadOutputs>& reference) {
  if (predicted.size() != reference.size())
    throw DomainError("joint_accuracy: turn count mismatch");
  if (predicted.empty()) throw DomainError("joint_accuracy: no turns");
  const std::size_t slots = reference.front().present.size();
  std::vector<long> correct(1 + slots, 0);
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    if (predicted[u].present.size() != slots || reference[u].present.size() != slots)
      throw DomainError("joint_accuracy: inconsistent slot head count");
    if (predicted[u].act == reference[u].act) ++correct[0];
    for (std::size_t s = 0; s < slots; ++s)
      if (predicted[u].present[s] == reference[u].present[s]) ++correct[1 + s];
  }
  double sum = 0;
  for (long c : correct) sum += static_cast<double>(c) / static_cast<double>(predicted.size());
  return sum / static_cast<double>(correct.size());
}

std::optional<double> ice(const std::vector<std::vector<ScoredItem>>& hypothesized,
                          const std::vector<ItemSet>& reference) {
  if (hypothesized.size() != reference.size()) throw DomainError("ice: turn count mismatch");
  long n = 0;
  double total = 0;
  for (std::size_t u = 0; u < reference.size(); ++u) {
    const auto ref = as_set(reference[u]);
    n += static_cast<long>(ref.size());
    std::set<SemanticItem> seen;
    for (const auto& h : hypothesized[u]) {
      if (!seen.insert(h.item).second) continue;
      if (!(h.confidence >= 0.0 && h.confidence <= 1.0))
        throw DomainError("ice: confidence outside [0,1]");
      total += item_cross_entropy(ref.count(h.item) > 0, h.confidence);
    }
    for (const auto& r : ref)
      if (!seen.count(r)) total += item_cross_entropy(true, 0.0);
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

ItemSet reference_items(const std::vector<DialogueAct>& acts, EvalLevel level) {
  ItemSet out{SemanticItem::act(act_pattern(acts))};
  for (const auto& [slot, value] : reference_pairs(acts)) {
    auto item = SemanticItem::pair(slot, level == EvalLevel::full ? value : std::string());
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(std::move(item));
  }
  return out;
}

std::vector<ScoredItem> frame_items(const SemanticFrame& frame, EvalLevel level) {
  std::vector<ScoredItem> out{{SemanticItem::act(frame.act), frame.act_confidence}};
  for (const auto& s : frame.slots) {
    if (level == EvalLevel::full)
      out.push_back({SemanticItem::pair(s.slot, s.value), s.confidence});
    else
      out.push_back({SemanticItem::pair(s.slot, {}), s.presence});
  }
  return out;
}

HeadOutputs frame_heads(const SemanticFrame& frame, const std::vector<std::string>& slots) {
  HeadOutputs h{frame.act, {}};
  for (const auto& s : slots)
    h.present.push_back(std::any_of(frame.slots.begin(), frame.slots.end(),
                                    [&](const FrameSlot& f) { return f.slot == s; }));
  return h;
}

HeadOutputs reference_heads(const std::vector<DialogueAct>& acts, const std::vector<std::string>& slots) {
  HeadOutputs h{act_pattern(acts), {}};
  const auto pairs = reference_pairs(acts);
  for (const auto& s : slots)
    h.present.push_back(std::any_of(pairs.begin(), pairs.end(),
                                    [&](const SlotValue& p) { return p.first == s; }));
  return h;
}

ScoreReport evaluate(const std::vector<SemanticFrame>& predicted,
                     const std::vector<std::vector<DialogueAct>>& references,
                     const std::vector<std::string>& slots, EvalLevel level) {
  if (predicted.size() != references.size())
    throw DomainError("evaluate: " + std::to_string(predicted.size()) + " frames for " +
                      std::to_string(references.size()) + " reference turns");
  ScoreReport rep;
  rep.level = level;
  rep.n_turns = static_cast<long>(predicted.size());

  std::vector<ItemSet> pred_sets, ref_sets;
  std::vector<std::vector<ScoredItem>> scored;
  std::vector<HeadOutputs> pred_heads, ref_heads;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    scored.push_back(frame_items(predicted[u], level));
    ItemSet p;
    for (const auto& s : scored.back()) p.push_back(s.item);
    pred_sets.push_back(std::move(p));
    ref_sets.push_back(reference_items(references[u], level));
    pred_heads.push_back(frame_heads(predicted[u], slots));
    ref_heads.push_back(reference_heads(references[u], slots));
  }
  rep.counts = item_counts(pred_sets, ref_sets);
  const auto m = prf1(rep.counts);
  rep.precision = m.precision;
  rep.recall = m.recall;
  rep.f1 = m.f1;
  rep.ice = ice(scored, ref_sets);
  for (const auto& r : ref_sets) rep.n_reference_items += static_cast<long>(as_set(r).size());
  if (!predicted.empty()) rep.accuracy = joint_accuracy(pred_heads, ref_heads);

  for (const auto& slot : slots) {
    SlotReport sr;
    std::vector<ItemSet> ps, rs;
    std::vector<std::vector<ScoredItem>> sc;
    long correct = 0;
    for (std::size_t u = 0; u < predicted.size(); ++u) {
      ItemSet p, r;
      std::vector<ScoredItem> s;
      for (const auto& it : scored[u])
        if (it.item.kind == SemanticItem::Kind::slot && it.item.slot == slot) {
          s.push_back(it);
          p.push_back(it.item);
        }
      for (const auto& it : ref_sets[u])
        if (it.kind == SemanticItem::Kind::slot && it.slot == slot) r.push_back(it);
      if (!r.empty()) {
        ++sr.reference_turns;
        if (std::any_of(p.begin(), p.end(), [&](const SemanticItem& x) {
              return std::find(r.begin(), r.end(), x) != r.end();
            }))
          ++correct;
      }
      ps.push_back(std::move(p));
      rs.push_back(std::move(r));
      sc.push_back(std::move(s));
    }
    sr.counts = item_counts(ps, rs);
    const auto sm = prf1(sr.counts);
    sr.precision = sm.precision;
    sr.recall = sm.recall;
    sr.f1 = sm.f1;
    sr.ice = ice(sc, rs);
    sr.accuracy = sr.reference_turns ? static_cast<double>(correct) / static_cast<double>(sr.reference_turns) : 0.0;
    rep.per_slot.emplace(slot, sr);
  }
  return rep;
}

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}
std::string fmt_ice(const std::optional<double>& v) { return v ? fmt(*v) : std::string("undefined"); }
}  // namespace

std::string ScoreReport::to_text() const {
  std::ostringstream os;
  os << "level      " << (level == EvalLevel::full ? "full" : "step1") << "\n"
     << "turns      " << n_turns << "\n"
     << "accuracy   " << fmt(accuracy) << "\n"
     << "precision  " << fmt(precision) << "\n"
     << "recall     " << fmt(recall) << "\n"
     << "f1         " << fmt(f1) << "\n"
     << "ice        " << fmt_ice(ice) << (ice ? "" : " (no reference items)") << "\n"
     << "counts     tp=" << counts.tp << " fp=" << counts.fp << " fn=" << counts.fn
     << " n=" << n_reference_items << "\n";
  if (!per_slot.empty()) {
    os << "per-slot   slot acc P R F1 ICE\n";
    for (const auto& [slot, s] : per_slot)
      os << "  " << slot << " " << fmt(s.accuracy) << " " << fmt(s.precision) << " "
         << fmt(s.recall) << " " << fmt(s.f1) << " " << fmt_ice(s.ice) << "\n";
  }
  return os.str();
}

std::string ScoreReport::to_table() const {
  std::ostringstream os;
  os << "accuracy\t" << fmt(accuracy) << "\n"
     << "precision\t" << fmt(precision) << "\n"
     << "recall\t" << fmt(recall) << "\n"
     << "f1\t" << fmt(f1) << "\n"
     << "ice\t" << fmt_ice(ice) << "\n"
     << "tp\t" << counts.tp << "\n"
     << "fp\t" << counts.fp << "\n"
     << "fn\t" << counts.fn << "\n"
     << "n\t" << n_reference_items << "\n";
  for (const auto& [slot, s] : per_slot) {
    os << "slot." << slot << ".accuracy\t" << fmt(s.accuracy) << "\n"
       << "slot." << slot << ".precision\t" << fmt(s.precision) << "\n"
       << "slot." << slot << ".recall\t" << fmt(s.recall) << "\n"
       << "slot." << slot << ".f1\t" << fmt(s.f1) << "\n"
       << "slot." << slot << ".ice\t" << fmt_ice(s.ice) << "\n";
  }
  return os.str();
}

}  // namespace sludec
