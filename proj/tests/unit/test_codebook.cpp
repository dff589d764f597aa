#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "humbench/codebook.hpp"
#include "humbench/error.hpp"

using namespace humbench;

namespace {

const char* kMinimal = R"(version: 1
labels:
  - name: Seeks Input
    abbrev: SI
    polarity: IH
    definition: Asks others for their view.
  - name: Talks Down
    abbrev: TD
    polarity: IA
    definition: Addresses others as inferior.
)";

Codebook draft_codebook() {
    auto labels = default_codebook().labels();
    labels.push_back({"Self-Righteousness", "SR", Polarity::IA, "Treats own position as morally beyond question."});
    labels.push_back({"Avoids Challenging Religious Customs", "ACRC", Polarity::IH, "Leaves customs unquestioned."});
    return Codebook(1, labels);
}

}  // namespace

TEST(Codebook, DefaultHasThirteenLabelsSevenIhSixIa) {
    const auto& cb = default_codebook();
    EXPECT_EQ(cb.size(), 13u);
    EXPECT_EQ(cb.labels_of(Polarity::IH).size(), 7u);
    EXPECT_EQ(cb.labels_of(Polarity::IA).size(), 6u);
    EXPECT_EQ(cb.at("DP").name, "Displays Prejudice");
    EXPECT_EQ(cb.abbrevs(),
              (std::vector<std::string>{"APB", "RDP", "EM", "RL", "RB", "SO", "MF", "DAL", "CDP", "CA", "AH", "DP",
                                        "UC"}));
}

TEST(Codebook, LookupByNameIsCaseAndQuoteInsensitive) {
    const auto& cb = default_codebook();
    ASSERT_NE(cb.find_by_name("ad hominem"), nullptr);
    EXPECT_EQ(cb.find_by_name("ad hominem")->abbrev, "AH");
    EXPECT_EQ(cb.find_by_name("nonexistent"), nullptr);
    EXPECT_THROW(cb.at("ZZ"), ValidationError);
}

TEST(Codebook, ParsesMinimalFile) {
    auto cb = parse_codebook(kMinimal);
    EXPECT_EQ(cb.version(), 1);
    EXPECT_EQ(cb.size(), 2u);
}

TEST(Codebook, RejectsDuplicateAbbrev) {
    std::string y = kMinimal;
    y += "  - name: Condescends\n    abbrev: TD\n    polarity: IA\n    definition: x.\n";
    EXPECT_THROW(parse_codebook(y), ValidationError);
}

TEST(Codebook, RejectsSinglePolarity) {
    const char* only_ih = R"(version: 1
labels:
  - name: Seeks Input
    abbrev: SI
    polarity: IH
    definition: Asks others for their view.
)";
    EXPECT_THROW(parse_codebook(only_ih), ValidationError);
}

TEST(Codebook, RejectsUnknownFields) {
    std::string y = std::string(kMinimal) + "colour: blue\n";
    EXPECT_THROW(parse_codebook(y), ValidationError);
}

TEST(Codebook, YamlRoundTrip) {
    const auto& cb = default_codebook();
    EXPECT_EQ(parse_codebook(codebook_to_yaml(cb)), cb);
    auto revised = apply_revision(cb, Revision{RevisionKind::Redefine, {"EM"}, "", std::nullopt, "Cites sources.", "clarity"});
    EXPECT_EQ(parse_codebook(codebook_to_yaml(revised.codebook)), revised.codebook);
}

TEST(AggregateCoarse, DocumentedCases) {
    const auto& cb = default_codebook();
    EXPECT_EQ(aggregate_coarse({"APB", "SO"}, cb), (CoarseClass{Coarse::IH, false}));
    EXPECT_EQ(aggregate_coarse({}, cb), (CoarseClass{Coarse::Neutral, false}));
    EXPECT_EQ(aggregate_coarse({"APB", "CA"}, cb), (CoarseClass{Coarse::Neutral, true}));
    EXPECT_EQ(aggregate_coarse({"CA", "AH", "RB"}, cb), (CoarseClass{Coarse::IA, false}));
    EXPECT_THROW(aggregate_coarse({"XYZ"}, cb), ValidationError);
}

TEST(AggregateCoarse, DependsOnlyOnPolarityCounts) {
    const auto& cb = default_codebook();
    const auto ih = cb.labels_of(Polarity::IH);
    const auto ia = cb.labels_of(Polarity::IA);
    std::mt19937 gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n_ih = gen() % (ih.size() + 1), n_ia = gen() % (ia.size() + 1);
        auto pick = [&](const std::vector<CodebookLabel>& pool, std::size_t n) {
            std::vector<CodebookLabel> shuffled = pool;
            std::shuffle(shuffled.begin(), shuffled.end(), gen);
            LabelSet out;
            for (std::size_t i = 0; i < n; ++i) out.insert(shuffled[i].abbrev);
            return out;
        };
        LabelSet s1 = pick(ih, n_ih), s2 = pick(ih, n_ih);
        for (const auto& x : pick(ia, n_ia)) s1.insert(x);
        for (const auto& x : pick(ia, n_ia)) s2.insert(x);
        EXPECT_EQ(aggregate_coarse(s1, cb), aggregate_coarse(s2, cb));
    }
}

TEST(AggregateCoarse, PolarityAntisymmetry) {
    const auto& cb = default_codebook();
    const auto ih = cb.labels_of(Polarity::IH);
    const auto ia = cb.labels_of(Polarity::IA);
    // Mirror: the i-th IH label <-> the i-th IA label (six pairs).
    std::mt19937 gen(8);
    for (int trial = 0; trial < 300; ++trial) {
        LabelSet s, mirror;
        for (std::size_t i = 0; i < ia.size(); ++i) {
            const unsigned pick = gen() % 3;
            if (pick == 1) {
                s.insert(ih[i].abbrev);
                mirror.insert(ia[i].abbrev);
            } else if (pick == 2) {
                s.insert(ia[i].abbrev);
                mirror.insert(ih[i].abbrev);
            }
        }
        const auto a = aggregate_coarse(s, cb).value, b = aggregate_coarse(mirror, cb).value;
        EXPECT_EQ(a == Coarse::IH, b == Coarse::IA);
        EXPECT_EQ(a == Coarse::IA, b == Coarse::IH);
    }
}

TEST(CoarseName, ParsesAliases) {
    EXPECT_EQ(parse_coarse_name("ih"), Coarse::IH);
    EXPECT_EQ(parse_coarse_name("NE"), Coarse::Neutral);
    EXPECT_EQ(parse_coarse_name("neutral"), Coarse::Neutral);
    EXPECT_THROW(parse_coarse_name("maybe"), ValidationError);
}

TEST(Revision, MergeIntoRetainedLabel) {
    const Codebook v1 = draft_codebook();
    Revision r{RevisionKind::Merge, {"SR"}, "CA", std::nullopt, "", "often co-occur"};
    auto out = apply_revision(v1, r);
    EXPECT_EQ(out.codebook.version(), 2);
    EXPECT_FALSE(out.codebook.contains("SR"));
    EXPECT_EQ(out.remap.at("SR"), std::optional<std::string>("CA"));
    EXPECT_EQ(out.remap.at("CA"), std::optional<std::string>("CA"));
    // The original is untouched.
    EXPECT_TRUE(v1.contains("SR"));
    EXPECT_EQ(v1.version(), 1);
    EXPECT_EQ(out.codebook.changelog().size(), 1u);
}

TEST(Revision, EliminateMapsToNothing) {
    auto out = apply_revision(draft_codebook(), Revision{RevisionKind::Eliminate, {"ACRC"}, "", std::nullopt, "", ""});
    EXPECT_FALSE(out.codebook.contains("ACRC"));
    EXPECT_EQ(out.remap.at("ACRC"), std::nullopt);
    EXPECT_NE(remap_to_tsv(out.remap).find("ACRC\t\n"), std::string::npos);
}

TEST(Revision, EmptyRevisionBumpsVersionOnly) {
    const auto& cb = default_codebook();
    auto out = apply_revisions(cb, {});
    EXPECT_EQ(out.codebook.version(), cb.version() + 1);
    EXPECT_EQ(out.codebook.labels(), cb.labels());
}

TEST(Revision, Errors) {
    const auto& cb = default_codebook();
    EXPECT_THROW(apply_revision(cb, Revision{RevisionKind::Merge, {"CA"}, "NOPE", std::nullopt, "", ""}),
                 ValidationError);
    EXPECT_THROW(apply_revision(cb, Revision{RevisionKind::Eliminate, {"NOPE"}, "", std::nullopt, "", ""}),
                 ValidationError);
    // Removing the last IA labels breaks the polarity invariant.
    EXPECT_THROW(apply_revision(cb, Revision{RevisionKind::Eliminate, {"DAL", "CDP", "CA", "AH", "DP", "UC"}, "",
                                             std::nullopt, "", ""}),
                 ValidationError);
}

TEST(Revision, ChainedMergeRepointsEarlierRemaps) {
    const Codebook v1 = draft_codebook();
    std::vector<Revision> revs{{RevisionKind::Merge, {"SR"}, "CA", std::nullopt, "", ""},
                               {RevisionKind::Merge, {"CA"}, "AH", std::nullopt, "", ""}};
    auto out = apply_revisions(v1, revs);
    EXPECT_EQ(out.remap.at("SR"), std::optional<std::string>("AH"));
    EXPECT_EQ(out.codebook.version(), 2);
}
