#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "humbench/corpus.hpp"
#include "humbench/error.hpp"
#include "humbench/gold.hpp"

using namespace humbench;
using nlohmann::json;

namespace {

Thread make_thread(const std::string& sub, const std::string& id, const std::string& author,
                   std::vector<std::string> bodies) {
    Thread t{sub, id, author, "Title " + id, "Body of " + id, {}, 1700000000};
    int pos = 1;
    for (auto& b : bodies) t.comments.push_back({"c" + std::to_string(pos), "u" + std::to_string(pos), b, pos++});
    return t;
}

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "humbench_corpus_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Ingest, SkipsMalformedLinesAndCountsThem) {
    std::stringstream in;
    in << thread_to_json(make_thread("atheism", "p1", "a", {"hi there"})).dump() << "\n";
    in << "{not json\n";
    in << json{{"subreddit", "x"}}.dump() << "\n";  // missing fields
    in << thread_to_json(make_thread("atheism", "p1", "a", {"dup"})).dump() << "\n";
    in << "\n";
    in << thread_to_json(make_thread("Christianity", "p2", "b", {"one", "two"})).dump() << "\n";
    auto store = ingest_jsonl(in);
    EXPECT_EQ(store.size(), 2u);
    EXPECT_EQ(store.skipped, 3u);
    EXPECT_EQ(store.warnings.size(), 3u);
}

TEST(Ingest, RejectsGappedCommentPositions) {
    json j = thread_to_json(make_thread("a", "p", "x", {"c1", "c2"}));
    j["comments"][1]["position"] = 3;
    EXPECT_THROW(thread_from_json(j), ValidationError);
}

TEST(Ingest, ThreadJsonRoundTrip) {
    const Thread t = make_thread("islam", "abc", "u0", {"first", "second"});
    const Thread back = thread_from_json(thread_to_json(t));
    EXPECT_EQ(back.post_id, t.post_id);
    EXPECT_EQ(back.comments.size(), 2u);
    EXPECT_EQ(back.comments[1].body, "second");
    EXPECT_EQ(back.created_at, t.created_at);
}

TEST(Activity, CapIsPerSubreddit) {
    ActivityTable a;
    a.add("heavy", "s1", 10001);
    a.add("split", "s1", 6000);
    a.add("split", "s2", 6000);
    a.add("edge", "s1", 10000);
    EXPECT_TRUE(a.exceeds("heavy", 10000));
    EXPECT_FALSE(a.exceeds("split", 10000));
    EXPECT_FALSE(a.exceeds("edge", 10000));
    EXPECT_FALSE(a.exceeds("unknown", 10000));
}

TEST(Activity, LoadsCsvWithOptionalHeader) {
    const auto path = temp_file("activity.csv");
    {
        std::ofstream out(path);
        out << "author_id,subreddit,count\nu1,s1,5\nu1,s1,7\nu2\ts2\t3\n";
    }
    auto a = load_activity(path);
    EXPECT_EQ(a.count("u1", "s1"), 12);
    EXPECT_EQ(a.count("u2", "s2"), 3);
}

TEST(Sample, CapsPerSubredditAndDropsActiveAuthors) {
    ThreadStore store;
    for (int i = 0; i < 30; ++i) store.threads.push_back(make_thread("s1", "a" + std::to_string(i), "ok", {"x"}));
    for (int i = 0; i < 5; ++i) store.threads.push_back(make_thread("s2", "b" + std::to_string(i), "ok", {"x"}));
    store.threads.push_back(make_thread("s2", "bad", "heavy", {"x"}));
    ActivityTable a;
    a.add("heavy", "s9", 20000);
    SampleOptions opt;
    opt.max_posts_per_subreddit = 10;
    opt.seed = 3;
    auto kept = sample_threads(store, a, opt);
    std::map<std::string, int> per;
    for (const auto& t : kept.threads) {
        ++per[t.subreddit];
        EXPECT_NE(t.author_id, "heavy");
    }
    EXPECT_EQ(per["s1"], 10);
    EXPECT_EQ(per["s2"], 5);
    auto again = sample_threads(store, a, opt);
    ASSERT_EQ(again.size(), kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_EQ(again.threads[i].post_id, kept.threads[i].post_id);
}

TEST(Targets, ExcludesUnusableAndForcesFirstWhenSecondMissing) {
    ThreadStore store;
    store.threads.push_back(make_thread("s", "no_comments", "a", {}));
    store.threads.push_back(make_thread("s", "deleted_first", "a", {"[deleted]", "fine"}));
    for (int i = 0; i < 40; ++i) store.threads.push_back(make_thread("s", "one" + std::to_string(i), "a", {"only"}));
    for (int i = 0; i < 40; ++i)
        store.threads.push_back(make_thread("s", "two" + std::to_string(i), "a", {"first", "[removed]"}));
    TargetOptions opt;
    opt.max_per_subreddit = 1000;
    auto built = build_targets(store, opt);
    EXPECT_EQ(built.targets.size(), 80u);
    for (const auto& t : built.targets) {
        EXPECT_EQ(t.position, TargetPosition::First);
        EXPECT_TRUE(t.first_comment.empty());
        EXPECT_NE(t.thread_ref, "no_comments");
        EXPECT_NE(t.thread_ref, "deleted_first");
    }
}

TEST(Targets, CoinFlipPicksBothPositions) {
    ThreadStore store;
    for (int i = 0; i < 60; ++i)
        store.threads.push_back(make_thread("s", "t" + std::to_string(i), "a", {"first words", "second words"}));
    auto built = build_targets(store, TargetOptions{100, 11});
    int second = 0;
    for (const auto& t : built.targets) {
        if (t.position == TargetPosition::Second) {
            ++second;
            EXPECT_EQ(t.first_comment, "first words");
            EXPECT_EQ(t.target_text, "second words");
        } else {
            EXPECT_EQ(t.target_text, "first words");
        }
    }
    EXPECT_GT(second, 10);
    EXPECT_LT(second, 50);
}

TEST(Targets, JsonRoundTrip) {
    AnnotationTarget t{"id1", "s", "p", TargetPosition::Second, "T", "S", "F", "X"};
    const auto back = target_from_json(target_to_json(t));
    EXPECT_EQ(back.target_id, "id1");
    EXPECT_EQ(back.position, TargetPosition::Second);
    EXPECT_EQ(back.first_comment, "F");
    EXPECT_NE(t.context_text().find("F"), std::string::npos);
}

TEST(Describe, MomentsArePopulation) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto m = moments(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_DOUBLE_EQ(m.std, std::sqrt(1.25));
    EXPECT_DOUBLE_EQ(m.max, 4);
}

TEST(Describe, CountsWordsSentencesAndUnionLabels) {
    GoldRecord r;
    r.target.title = "One two.";
    r.target.submission_text = "Three four five! Six?";
    r.target.target_text = "Seven eight.";
    r.labels_a = {"APB", "CA"};
    r.labels_b = {"CA", "RB"};
    const std::vector<GoldRecord> d{r};
    const auto s = describe(d);
    EXPECT_EQ(s.records, 1u);
    EXPECT_DOUBLE_EQ(s.unique_labels.mean, 3);
    EXPECT_DOUBLE_EQ(s.context_words.mean, 6);
    EXPECT_DOUBLE_EQ(s.context_sentences.mean, 3);
    EXPECT_DOUBLE_EQ(s.target_words.mean, 2);
    EXPECT_DOUBLE_EQ(s.target_sentences.mean, 1);
}

TEST(Csv, QuotedFieldsWithCommasQuotesAndNewlines) {
    std::stringstream in("a,b,c\r\n\"x, y\",\"he said \"\"hi\"\"\",\"line1\nline2\"\n,,\n");
    const auto rows = parse_csv(in);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][0], "x, y");
    EXPECT_EQ(rows[1][1], "he said \"hi\"");
    EXPECT_EQ(rows[1][2], "line1\nline2");
    EXPECT_EQ(rows[2], (std::vector<std::string>{"", "", ""}));
    std::stringstream bad("\"open");
    EXPECT_THROW(parse_csv(bad), ValidationError);
}

TEST(Gold, LabelCells) {
    const auto& cb = default_codebook();
    EXPECT_EQ(parse_label_cell("Ad Hominem, APB", cb), (LabelSet{"AH", "APB"}));
    EXPECT_TRUE(parse_label_cell("", cb).empty());
    EXPECT_TRUE(parse_label_cell("none", cb).empty());
    EXPECT_TRUE(parse_label_cell("nan", cb).empty());
    EXPECT_THROW(parse_label_cell("Definitely Not A Label", cb), ValidationError);
}

TEST(Gold, CsvLoadsAndDerivesAgreement) {
    const auto& cb = default_codebook();
    std::stringstream in(
        "Title,Content,Target Comment,Labels_1,Labels_2,Coarse\n"
        "T1,C1,X1,\"Ad Hominem, Condescending Attitude\",Ad Hominem,IA\n"
        "T2,C2,X2,,,Neutral\n");
    auto set = load_gold_csv(in, cb);
    ASSERT_EQ(set.records.size(), 2u);
    EXPECT_EQ(set.records[0].agreed, (LabelSet{"AH"}));
    EXPECT_EQ(set.records[0].coarse.value, Coarse::IA);
    EXPECT_EQ(set.records[1].coarse.value, Coarse::Neutral);
    EXPECT_EQ(set.records[0].target.target_id, "1");
}

TEST(Gold, IntegrityStrictThrowsWarnKeepsStoredValue) {
    const auto& cb = default_codebook();
    const std::string csv =
        "title,content,target_comment,labels_1,labels_2,coarse\n"
        "T,C,X,Acknowledges Personal Beliefs,Acknowledges Personal Beliefs,IA\n";
    std::stringstream strict(csv);
    EXPECT_THROW(load_gold_csv(strict, cb), IntegrityError);
    std::stringstream warn(csv);
    auto set = load_gold_csv(warn, cb, GoldOptions{CoarseRule::Union, IntegrityMode::Warn});
    ASSERT_EQ(set.records.size(), 1u);
    EXPECT_EQ(set.records[0].coarse.value, Coarse::IA);
    EXPECT_EQ(set.warnings.size(), 1u);
}

TEST(Gold, MissingColumnIsValidationError) {
    std::stringstream in("title,content,labels_1,labels_2,coarse\n");
    EXPECT_THROW(load_gold_csv(in, default_codebook()), ValidationError);
}

TEST(Gold, JsonlRoundTrip) {
    const auto& cb = default_codebook();
    const auto fixture = std::filesystem::path(HUMBENCH_FIXTURE_DIR) / "replay" / "gold_20.jsonl";
    auto set = load_gold(fixture, cb);
    ASSERT_EQ(set.records.size(), 20u);
    const auto path = temp_file("gold_copy.jsonl");
    write_gold(set.records, path);
    auto back = load_gold(path, cb);
    ASSERT_EQ(back.records.size(), set.records.size());
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        EXPECT_EQ(back.records[i].target.target_id, set.records[i].target.target_id);
        EXPECT_EQ(back.records[i].labels_a, set.records[i].labels_a);
        EXPECT_EQ(back.records[i].labels_b, set.records[i].labels_b);
        EXPECT_EQ(back.records[i].agreed, intersect(set.records[i].labels_a, set.records[i].labels_b));
        EXPECT_EQ(back.records[i].coarse, set.records[i].coarse);
    }
}

TEST(Gold, SetAlgebra) {
    EXPECT_EQ(intersect({"A", "B"}, {"B", "C"}), (LabelSet{"B"}));
    EXPECT_EQ(unite({"A", "B"}, {"B", "C"}), (LabelSet{"A", "B", "C"}));
}
