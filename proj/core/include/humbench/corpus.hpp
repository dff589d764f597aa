#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace humbench {

struct Comment {
    std::string comment_id;
    std::string author_id;
    std::string body;
    int position = 1;  // 1-based, contiguous within the thread
};

struct Thread {
    std::string subreddit;
    std::string post_id;
    std::string author_id;  // submission author
    std::string title;
    std::string submission_text;
    std::vector<Comment> comments;
    std::int64_t created_at = 0;  // UTC seconds
};

struct ThreadStore {
    std::vector<Thread> threads;
    std::size_t skipped = 0;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return threads.size(); }
};

// One thread per line; malformed lines are skipped and counted. Throws
// ValidationError when the file cannot be read.
ThreadStore ingest_dump(const std::filesystem::path& path);
ThreadStore ingest_jsonl(std::istream& in);

Thread thread_from_json(const nlohmann::json& j);
nlohmann::json thread_to_json(const Thread& t);
void write_threads(const ThreadStore& store, const std::filesystem::path& path);

// Contribution counts per (author, subreddit).
class ActivityTable {
public:
    void add(const std::string& author, const std::string& subreddit, std::int64_t count);
    std::int64_t count(const std::string& author, const std::string& subreddit) const;
    // True when the author has more than `cap` contributions in any single subreddit.
    bool exceeds(const std::string& author, std::int64_t cap) const;
    std::size_t size() const noexcept { return counts_.size(); }

private:
    std::map<std::string, std::map<std::string, std::int64_t>> counts_;
};

// Delimited author_id,subreddit,count rows (comma or tab); a header row is optional.
ActivityTable load_activity(const std::filesystem::path& path);

struct SampleOptions {
    int max_posts_per_subreddit = 500;
    std::int64_t activity_cap = 10000;
    std::uint64_t seed = 0;
};

// Per subreddit: drop threads by over-active authors, then uniformly keep
// min(eligible, max_posts_per_subreddit). Subreddits are visited in name order.
ThreadStore sample_threads(const ThreadStore& store, const ActivityTable& activity, const SampleOptions& opt);

enum class TargetPosition { First, Second };

struct AnnotationTarget {
    std::string target_id;
    std::string subreddit;
    std::string thread_ref;  // post_id
    TargetPosition position = TargetPosition::First;
    std::string title;
    std::string submission_text;
    std::string first_comment;  // non-empty only when position == Second
    std::string target_text;

    // Title and submission, plus the first comment for second-comment targets.
    std::string context_text() const;
};

nlohmann::json target_to_json(const AnnotationTarget& t);
AnnotationTarget target_from_json(const nlohmann::json& j);
std::vector<AnnotationTarget> load_targets(const std::filesystem::path& path);
void write_targets(std::span<const AnnotationTarget> targets, const std::filesystem::path& path);

struct TargetOptions {
    int max_per_subreddit = 40;
    std::uint64_t seed = 0;
};

struct TargetBuild {
    std::vector<AnnotationTarget> targets;
    std::vector<std::string> warnings;
};

// Samples up to max_per_subreddit threads per subreddit and picks the first
// or second comment by coin flip. Threads without a usable first comment are
// excluded; a missing or deleted second comment forces the first.
TargetBuild build_targets(const ThreadStore& store, const TargetOptions& opt);

// "[deleted]", "[removed]" and blank bodies.
bool is_placeholder_body(const std::string& body);

struct Moments {
    double mean = 0.0;
    double std = 0.0;  // population
    double max = 0.0;
};

struct DescriptiveStats {
    Moments unique_labels;
    Moments context_words;
    Moments context_sentences;
    Moments target_words;
    Moments target_sentences;
    std::size_t records = 0;
};

struct GoldRecord;

// Words are whitespace-delimited; sentences split on '.', '!', '?' and newlines.
// Unique labels counts the union of both annotators' labels.
DescriptiveStats describe(std::span<const GoldRecord> dataset);
Moments moments(std::span<const double> values);

nlohmann::json stats_to_json(const DescriptiveStats& s);

}  // namespace humbench
