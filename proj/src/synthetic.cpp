#include "sra/synthetic.hpp"

#include <array>
#include <cstdio>
#include <set>
#include <vector>

#include "sra/errors.hpp"
#include "sra/util.hpp"

namespace sra {

namespace {

const std::vector<std::string> kFillers = {
    "agreement", "party",      "parties",   "shall",      "herein",
    "thereof",   "pursuant",   "provision", "section",    "clause",
    "obligation", "notice",    "written",   "days",       "business",
    "company",   "other",      "such",      "without",    "including",
    "reasonable", "applicable", "terms",    "conditions", "rights",
    "law",       "effect",     "date",      "period",     "upon",
    "may",       "will",       "must",      "deemed",     "respect",
    "subject",   "accordance", "provided",  "however",    "event"};

struct HeadClass {
  std::string label;
  std::vector<std::string> sig;
};

const std::vector<HeadClass> kHeads = {
    {"confidentiality",
     {"nondisclosure", "proprietary", "confidential", "recipient", "disclosing",
      "safeguard", "secrecy", "divulge"}},
    {"payments",
     {"invoice", "remittance", "payable", "installment", "arrears", "surcharge",
      "disbursement", "refundable"}},
    {"termination",
     {"terminate", "expiration", "breach", "cure", "cessation", "forthwith",
      "winding", "lapse"}},
};

struct TailClass {
  std::string label;
  std::vector<std::string> sig;
};

const std::vector<TailClass> kTails = {
    {"audit_rights",
     {"audit", "auditors", "inspection", "workpapers", "recordkeeping", "examiners",
      "attestation", "fieldwork"}},
    {"data_escrow",
     {"escrow", "depository", "custodian", "sourcecode", "verification", "deposit",
      "escrowed", "releasing"}},
    {"export_control",
     {"export", "sanctions", "embargo", "reexport", "dualuse", "denied", "customs",
      "tariff"}},
    {"force_majeure",
     {"majeure", "hurricane", "earthquake", "pandemic", "unforeseeable", "calamity",
      "insurrection", "floods"}},
    {"indemnity_cap",
     {"indemnify", "indemnification", "holdharmless", "losses", "liability",
      "aggregate", "defend", "capped"}},
    {"liquidated_damages",
     {"liquidated", "damages", "penalty", "genuine", "preestimate", "compensatory",
      "quantify", "ascertain"}},
    {"quiet_enjoyment",
     {"quiet", "enjoyment", "peaceable", "possession", "tenant", "landlord",
      "interference", "covenant"}},
    {"severability",
     {"severable", "severability", "unenforceable", "invalid", "reformed", "stricken",
      "remainder", "enforceability"}},
    {"subrogation",
     {"subrogation", "subrogated", "insurer", "waiver", "recovery", "claims",
      "reimbursement", "underwriter"}},
};

void check_vocabulary_disjoint() {
  std::set<std::string> seen;
  auto add_all = [&](const std::vector<std::string>& words) {
    for (const auto& w : words) {
      if (!seen.insert(w).second) {
        throw Error("synthetic vocabulary collision: '" + w + "'");
      }
    }
  };
  add_all(kFillers);
  for (const auto& h : kHeads) add_all(h.sig);
  for (const auto& t : kTails) add_all(t.sig);
}

std::vector<std::string> pick_distinct(const std::vector<std::string>& pool,
                                       std::size_t n, SplitMix64& rng) {
  std::vector<std::string> copy = pool;
  deterministic_shuffle(copy, rng);
  if (n > copy.size()) n = copy.size();
  copy.resize(n);
  return copy;
}

std::string assemble(std::vector<std::string> tokens, SplitMix64& rng) {
  deterministic_shuffle(tokens, rng);
  return text::join(tokens);
}

std::string sample_id(Split split, const std::string& label, std::size_t idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", idx);
  return to_string(split) + "-" + label + "-" + buf;
}

void push(Dataset& dataset, Split split, const std::string& label, std::size_t idx,
          std::string text) {
  Sample s;
  s.id = sample_id(split, label, idx);
  s.text = std::move(text);
  s.labels = {label};
  s.split = split;
  dataset.samples.push_back(std::move(s));
}

// Repeat each of the first `doubled` entries once more.
std::vector<std::string> with_repeats(const std::vector<std::string>& words,
                                      std::size_t doubled) {
  std::vector<std::string> out = words;
  for (std::size_t i = 0; i < doubled && i < words.size(); ++i) out.push_back(words[i]);
  return out;
}

void append_link_pair(std::vector<std::string>& tokens, const std::string& link_a,
                      const std::string& link_b) {
  tokens.push_back(link_a);
  tokens.push_back(link_a);
  tokens.push_back(link_b);
  tokens.push_back(link_b);
}

std::string head_link(std::size_t trap_class, std::size_t pair, char side) {
  return "hlink" + std::to_string(trap_class) + "p" + std::to_string(pair) + "q" + side;
}

std::string tail_link(std::size_t tail_class, std::size_t pair, char side) {
  return "xref" + std::to_string(tail_class) + "p" + std::to_string(pair) + "q" + side;
}

}  // namespace

Dataset make_synthetic_corpus(const SyntheticSpec& spec) {
  check_vocabulary_disjoint();
  if (spec.tail_train % 2 != 0 || spec.tail_train == 0) {
    throw ConfigError("synthetic: tail_train must be even and positive");
  }
  if (spec.traps_per_head > spec.head_eval ||
      spec.bait_per_head * 2 > spec.head_train) {
    throw ConfigError("synthetic: trap/host counts exceed class sizes");
  }

  Dataset dataset;
  dataset.task = Task::SingleLabel;
  std::uint64_t stream = 0;
  auto next_rng = [&]() { return SplitMix64(mix64(spec.seed, ++stream)); };

  // bait_per_head here counts host pairs: train docs of head h carrying the
  // link tokens of the previous head's boilerplate traps.
  const std::size_t host_pairs = spec.bait_per_head;

  for (std::size_t h = 0; h < kHeads.size(); ++h) {
    const HeadClass& head = kHeads[h];
    const std::size_t prev = (h + kHeads.size() - 1) % kHeads.size();
    const std::size_t n_hosts = 2 * host_pairs;
    const std::size_t normal_train = spec.head_train - n_hosts;

    for (std::size_t i = 0; i < spec.head_train; ++i) {
      SplitMix64 rng = next_rng();
      std::vector<std::string> tokens = with_repeats(pick_distinct(head.sig, 4, rng), 4);
      auto fillers = pick_distinct(kFillers, 9, rng);
      tokens.insert(tokens.end(), fillers.begin(), fillers.end());
      if (i >= normal_train) {
        // Host doc: an ordinary clause of this class that also carries the
        // cross-reference tokens of the previous head's boilerplate traps.
        const std::size_t host_idx = i - normal_train;
        const std::size_t pair = host_idx / 2;
        append_link_pair(tokens, head_link(prev, pair, 'a'), head_link(prev, pair, 'b'));
      }
      push(dataset, Split::Train, head.label, i, assemble(tokens, rng));
    }

    for (Split split : {Split::Validation, Split::Test}) {
      const std::size_t normal_eval = spec.head_eval - spec.traps_per_head;
      for (std::size_t i = 0; i < spec.head_eval; ++i) {
        SplitMix64 rng = next_rng();
        std::vector<std::string> tokens;
        if (i < normal_eval) {
          tokens = with_repeats(pick_distinct(head.sig, 4, rng), 4);
          auto fillers = pick_distinct(kFillers, 9, rng);
          tokens.insert(tokens.end(), fillers.begin(), fillers.end());
        } else {
          // Boilerplate trap: thin own-class signature plus cross-reference
          // tokens whose only train-side occurrences sit in the next head
          // class; indiscriminate augmentation appends wrong-class evidence.
          const std::size_t pair = (i - normal_eval) % host_pairs;
          tokens = with_repeats(pick_distinct(head.sig, 2, rng), 2);
          append_link_pair(tokens, head_link(h, pair, 'a'), head_link(h, pair, 'b'));
          auto fillers = pick_distinct(kFillers, 9, rng);
          tokens.insert(tokens.end(), fillers.begin(), fillers.end());
        }
        push(dataset, split, head.label, i, assemble(tokens, rng));
      }
    }
  }

  for (std::size_t t = 0; t < kTails.size(); ++t) {
    const TailClass& tail = kTails[t];
    const std::size_t pairs = spec.tail_train / 2;

    for (std::size_t j = 0; j < pairs; ++j) {
      SplitMix64 pair_rng = next_rng();
      auto shared_fillers = pick_distinct(kFillers, 7, pair_rng);
      for (std::size_t half = 0; half < 2; ++half) {
        SplitMix64 rng = next_rng();
        std::vector<std::string> tokens = with_repeats(tail.sig, 3);
        append_link_pair(tokens, tail_link(t, j, 'a'), tail_link(t, j, 'b'));
        auto fillers = shared_fillers;
        if (half == 1) {
          auto alt = pick_distinct(kFillers, 2, rng);
          fillers[0] = alt[0];
          fillers[1] = alt[1];
        }
        tokens.insert(tokens.end(), fillers.begin(), fillers.end());
        push(dataset, Split::Train, tail.label, 2 * j + half, assemble(tokens, rng));
      }
    }

    for (Split split : {Split::Validation, Split::Test}) {
      for (std::size_t i = 0; i < spec.tail_eval; ++i) {
        SplitMix64 rng = next_rng();
        const std::size_t j = i % pairs;
        std::vector<std::string> tokens;
        append_link_pair(tokens, tail_link(t, j, 'a'), tail_link(t, j, 'b'));
        // A couple of head-signature confusers keep the raw text pointing at
        // a head class; the appended train clause has to overrule them.
        auto confusers =
            pick_distinct(kHeads[t % kHeads.size()].sig, spec.confusers_per_tail_eval, rng);
        tokens.insert(tokens.end(), confusers.begin(), confusers.end());
        auto fillers = pick_distinct(kFillers, 9, rng);
        tokens.insert(tokens.end(), fillers.begin(), fillers.end());
        push(dataset, split, tail.label, i, assemble(tokens, rng));
      }
    }
  }

  std::set<std::string> vocab;
  for (const auto& s : dataset.samples) {
    if (s.split == Split::Train) vocab.insert(s.labels.begin(), s.labels.end());
  }
  dataset.label_vocab.assign(vocab.begin(), vocab.end());
  return dataset;
}

}  // namespace sra
