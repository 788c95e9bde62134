#include "support.hpp"

#include <gapmark/paradigms.hpp>

#include <random>
#include <set>

using namespace gapmark;
using test::label_strings;
using test::make_series;
using V = std::vector<std::string>;

TEST_CASE("gap labels") {
  CHECK(gap_label("Sleeping", "Bed_To_Toilet") == "GAP[Sleeping>Bed_To_Toilet]");
  CHECK(gap_label(kStartSentinel, "A") == "GAP[^>A]");
  CHECK(parse_gap_label("GAP[A>B]") == std::pair<std::string, std::string>{"A", "B"});
  CHECK_FALSE(parse_gap_label("GAP[A]"));
  CHECK_FALSE(parse_gap_label("Sleeping"));
  CHECK(is_paradigm_label("Unknown"));
  CHECK(is_paradigm_label("GAP[$>^]"));
  CHECK_FALSE(is_paradigm_label("Relax"));
  for (auto p : {Paradigm::GapRemoval, Paradigm::Unknown, Paradigm::Interactivity, Paradigm::Hybrid})
    CHECK(parse_paradigm(paradigm_key(p)) == p);
  CHECK_FALSE(parse_paradigm("p4"));
}

TEST_CASE("find_gap_runs") {
  const auto runs = find_gap_runs(make_series({"A", "", "", "B"}));
  REQUIRE(runs.size() == 1);
  CHECK(runs[0] == GapRun{1, 2, "A", "B"});

  const auto edge = find_gap_runs(make_series({"", "A"}));
  REQUIRE(edge.size() == 1);
  CHECK(edge[0] == GapRun{0, 0, "^", "A"});

  CHECK(find_gap_runs(make_series({"A", "B"})).empty());
  CHECK(find_gap_runs(make_series({"", ""})) == std::vector<GapRun>{{0, 1, "^", "$"}});
}

TEST_CASE("paradigm 1 removes gaps") {
  const auto out = apply_gap_removal(make_series({"A", "", "", "B"}));
  CHECK(label_strings(out.series) == V{"A", "B"});
  CHECK(out.space.base_activities == V{"A", "B"});
  CHECK(out.space.extra_labels.empty());
  CHECK(out.space.paradigm == Paradigm::GapRemoval);

  const auto full = make_series({"A", "B", "A"}, {1, 2, 3});
  CHECK(apply_gap_removal(full).series == full);
  CHECK_ERROR_CODE(apply_gap_removal(make_series({"", ""})), ErrorCode::AllSamplesNull);
}

TEST_CASE("paradigm 2 adds one Unknown state") {
  const auto out = apply_unknown_label(make_series({"A", "", "B"}));
  CHECK(label_strings(out.series) == V{"A", "Unknown", "B"});
  CHECK(out.space.size() == 3);
  CHECK(out.space.extra_labels == V{"Unknown"});

  const auto full = apply_unknown_label(make_series({"A", "B"}));
  CHECK(label_strings(full.series) == V{"A", "B"});
  CHECK(full.space.extra_labels == V{"Unknown"});

  CHECK(label_strings(apply_unknown_label(make_series({""})).series) == V{"Unknown"});
}

TEST_CASE("paradigm 3 labels gaps by their ordered neighbours") {
  const auto out = apply_interactivity_labels(make_series({"Sleeping", "", "Bed_To_Toilet", "", "Sleeping"}));
  CHECK(label_strings(out.series) == V{"Sleeping", "GAP[Sleeping>Bed_To_Toilet]", "Bed_To_Toilet",
                                       "GAP[Bed_To_Toilet>Sleeping]", "Sleeping"});
  CHECK(out.space.extra_labels.size() == 2);

  const auto one_pair = apply_interactivity_labels(make_series({"A", "", "B", "A", "", "", "B"}));
  CHECK(one_pair.space.extra_labels == V{"GAP[A>B]"});

  CHECK(label_strings(apply_interactivity_labels(make_series({"", "A"})).series) == V{"GAP[^>A]", "A"});
  CHECK(label_strings(apply_interactivity_labels(make_series({"A", ""})).series) == V{"A", "GAP[A>$]"});
}

TEST_CASE("activity names that collide with paradigm spellings are rejected") {
  // "Unknown" is already a paradigm label, so P2 output passes through unchanged.
  const auto p2 = apply_unknown_label(make_series({"A", ""}));
  CHECK(apply_unknown_label(p2.series).series == p2.series);
  CHECK(apply_unknown_label(p2.series).space.base_activities == V{"A"});
  CHECK_ERROR_CODE(apply_interactivity_labels(make_series({"^", ""})), ErrorCode::ReservedLabel);
  CHECK_ERROR_CODE(apply_gap_removal(make_series({"A>B"})), ErrorCode::ReservedLabel);
}

TEST_CASE("semantic rules") {
  const auto rules = parse_rules("# comment\nLeaving_Home -> Entering_Home\n\n  A->B  # trailing\n");
  CHECK(rules == std::vector<SemanticRule>{{"Leaving_Home", "Entering_Home"}, {"A", "B"}});
  CHECK(default_rules() == std::vector<SemanticRule>{{"Leaving_Home", "Entering_Home"}});
  CHECK_ERROR_CODE(parse_rules("A -> A"), ErrorCode::InvalidRule);
  CHECK_ERROR_CODE(parse_rules("A B"), ErrorCode::InvalidRule);
  CHECK_ERROR_CODE(parse_rules(" -> B"), ErrorCode::InvalidRule);

  const auto rule = default_rules();
  const auto leaving = make_series({"Leaving_Home", "", "", "Entering_Home"});
  CHECK(label_strings(apply_semantic_preprocess(leaving, rule)) ==
        V{"Leaving_Home", "Leaving_Home", "Leaving_Home", "Entering_Home"});

  const auto other = make_series({"Relax", "", "Entering_Home"});
  CHECK(apply_semantic_preprocess(other, rule) == other);

  const std::vector<SemanticRule> edge_rule = {{"^", "A"}};
  const auto edge = make_series({"", "A"});
  CHECK(apply_semantic_preprocess(edge, edge_rule) == edge);

  const auto hybrid = apply_hybrid(make_series({"Leaving_Home", "", "Entering_Home", "", "Relax"}), rule);
  CHECK(label_strings(hybrid.series) ==
        V{"Leaving_Home", "Leaving_Home", "Entering_Home", "GAP[Entering_Home>Relax]", "Relax"});
  CHECK(hybrid.space.paradigm == Paradigm::Hybrid);
}

TEST_CASE("projection to ground truth") {
  const auto space = apply_interactivity_labels(make_series({"Sleeping", "", "Bed_To_Toilet"})).space;
  CHECK(project_to_ground_truth("Sleeping", space) == "Sleeping");
  CHECK_FALSE(project_to_ground_truth("GAP[Sleeping>Bed_To_Toilet]", space));
  CHECK_FALSE(project_to_ground_truth("Unknown", space));
  CHECK_ERROR_CODE(project_to_ground_truth("Bogus", space), ErrorCode::UnknownLabelToken);
}

TEST_CASE("paradigm algebra on fuzzed series") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> length(1, 60);
  std::uniform_int_distribution<std::size_t> acts(1, 5);
  const std::vector<SemanticRule> no_rules;
  for (int round = 0; round < 300; ++round) {
    const auto s = test::random_gapped_series(rng, length(rng), acts(rng), 0.3);
    const auto runs = find_gap_runs(s);
    std::size_t gap_total = 0;
    for (const auto& r : runs) gap_total += r.length();
    CHECK(gap_total == s.null_count());

    if (s.null_count() < s.size()) {
      const auto p1 = apply_gap_removal(s);
      CHECK(p1.series.size() + gap_total == s.size());
      CHECK(apply_gap_removal(p1.series).series == p1.series);
    }
    for (auto p : {Paradigm::Unknown, Paradigm::Interactivity}) {
      const auto out = apply_paradigm(p, s);
      REQUIRE(out.series.size() == s.size());
      for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(out.series.samples[k].time == s.samples[k].time);
        CHECK(out.series.samples[k].code == s.samples[k].code);
        if (s.samples[k].label) CHECK(out.series.samples[k].label == s.samples[k].label);
        CHECK(out.space.contains(*out.series.samples[k].label));
      }
      CHECK(apply_paradigm(p, out.series).series == out.series);
    }

    const auto p3 = apply_interactivity_labels(s);
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& r : runs) {
      pairs.emplace(r.prev, r.next);
      for (std::size_t k = r.first; k <= r.last; ++k) CHECK(*p3.series.samples[k].label == gap_label(r.prev, r.next));
    }
    CHECK(p3.space.extra_labels.size() == pairs.size());
    const auto n = p3.space.base_activities.size();
    CHECK(p3.space.extra_labels.size() <= (n + 2) * (n + 2));

    const auto hybrid = apply_hybrid(s, no_rules);
    CHECK(hybrid.series == p3.series);
    CHECK(hybrid.space.extra_labels == p3.space.extra_labels);
  }
}
