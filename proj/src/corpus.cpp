#include "eqir/corpus.hpp"

#include "eqir/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace eqir {
namespace {

using nlohmann::json;

std::string line_prefix(std::size_t line_no)
{
    return "line " + std::to_string(line_no) + ": ";
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    return out;
}

// Calls fn(object, line_no) for every non-blank JSONL line.
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn)
{
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(line_prefix(line_no) + "malformed JSON");
        }
        if (!obj.is_object()) {
            throw DataError(line_prefix(line_no) + "expected a JSON object");
        }
        fn(obj, line_no);
    }
}

std::string string_field(const json& obj, const char* name, std::size_t line_no, bool required)
{
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) {
        if (required) {
            throw DataError(line_prefix(line_no) + "missing " + name);
        }
        return {};
    }
    if (it->is_string()) {
        return it->get<std::string>();
    }
    if (it->is_number_integer()) {
        return std::to_string(it->get<long long>());
    }
    throw DataError(line_prefix(line_no) + "field " + name + " is not a string");
}

std::optional<long long> parse_integer(std::string_view text)
{
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<double> parse_real(std::string_view text)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

} // namespace

std::vector<Document> load_corpus(const std::string& path)
{
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    for_each_record(path, [&](const json& obj, std::size_t line_no) {
        Document d;
        d.id = string_field(obj, "_id", line_no, true);
        if (d.id.empty()) {
            throw DataError(line_prefix(line_no) + "empty _id");
        }
        d.title = string_field(obj, "title", line_no, false);
        d.text = string_field(obj, "text", line_no, true);
        if (!seen.insert(d.id).second) {
            throw DataError(line_prefix(line_no) + "duplicate _id " + d.id);
        }
        docs.push_back(std::move(d));
    });
    return docs;
}

std::vector<Query> load_queries(const std::string& path)
{
    std::vector<Query> queries;
    std::unordered_set<std::string> seen;
    for_each_record(path, [&](const json& obj, std::size_t line_no) {
        Query q;
        q.id = string_field(obj, "_id", line_no, true);
        if (q.id.empty()) {
            throw DataError(line_prefix(line_no) + "empty _id");
        }
        q.text = string_field(obj, "text", line_no, true);
        if (trim(q.text).empty()) {
            throw DataError(line_prefix(line_no) + "empty query text");
        }
        if (!seen.insert(q.id).second) {
            throw DataError(line_prefix(line_no) + "duplicate _id " + q.id);
        }
        queries.push_back(std::move(q));
    });
    return queries;
}

Qrels load_qrels(const std::string& path)
{
    auto in = open_input(path);
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = line.find('\t') != std::string::npos ? split(line, '\t')
                                                            : split_whitespace(line);
        for (auto& f : fields) {
            f = trim(f);
        }
        if (first) {
            first = false;
            if (!fields.empty() && (fields[0] == "query-id" || fields[0] == "query_id")) {
                continue;
            }
        }
        // BEIR: query-id corpus-id score; TREC: qid iter docid grade.
        std::string_view qid, did, grade;
        if (fields.size() == 3) {
            qid = fields[0];
            did = fields[1];
            grade = fields[2];
        } else if (fields.size() == 4) {
            qid = fields[0];
            did = fields[2];
            grade = fields[3];
        } else {
            throw DataError(line_prefix(line_no) + "expected 3 or 4 columns, got "
                            + std::to_string(fields.size()));
        }
        if (qid.empty() || did.empty()) {
            throw DataError(line_prefix(line_no) + "empty query or document id");
        }
        auto value = parse_integer(grade);
        if (!value) {
            throw DataError(line_prefix(line_no) + "non-integer grade " + std::string(grade));
        }
        if (*value < 0) {
            throw DataError(line_prefix(line_no) + "negative grade");
        }
        qrels[std::string(qid)][std::string(did)] = static_cast<int>(*value);
    }
    return qrels;
}

void write_corpus(const std::vector<Document>& docs, const std::string& path)
{
    auto out = open_output(path);
    for (const auto& d : docs) {
        json obj = {{"_id", d.id}, {"title", d.title}, {"text", d.text}};
        out << obj.dump() << '\n';
    }
}

void write_queries(const std::vector<Query>& queries, const std::string& path)
{
    auto out = open_output(path);
    for (const auto& q : queries) {
        json obj = {{"_id", q.id}, {"text", q.text}};
        out << obj.dump() << '\n';
    }
}

void write_qrels(const Qrels& qrels, const std::string& path)
{
    auto out = open_output(path);
    out << "query-id\tcorpus-id\tscore\n";
    for (const auto& [qid, judged] : qrels) {
        for (const auto& [did, grade] : judged) {
            out << qid << '\t' << did << '\t' << grade << '\n';
        }
    }
}

BatchSet make_batches(const std::vector<Query>& queries, const Qrels& qrels,
                      const std::vector<Document>& corpus, std::size_t n, std::uint64_t seed)
{
    if (n == 0) {
        throw UsageError("need at least one negative per batch");
    }
    std::map<std::string_view, std::size_t> position;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        position.emplace(corpus[i].id, i);
    }

    Rng rng(seed);
    BatchSet out;
    for (const auto& q : queries) {
        std::vector<std::size_t> positives;
        std::set<std::size_t> relevant;
        if (auto it = qrels.find(q.id); it != qrels.end()) {
            for (const auto& [did, grade] : it->second) {
                if (grade < 1) {
                    continue;
                }
                auto pos = position.find(did);
                if (pos == position.end()) {
                    continue;
                }
                positives.push_back(pos->second);
                relevant.insert(pos->second);
            }
        }
        if (positives.empty()) {
            ++out.skipped_queries;
            continue;
        }
        std::vector<std::size_t> eligible;
        eligible.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (!relevant.contains(i)) {
                eligible.push_back(i);
            }
        }
        if (eligible.size() < n) {
            throw DataError("query " + q.id + ": only " + std::to_string(eligible.size())
                            + " eligible negatives for n=" + std::to_string(n));
        }
        for (auto p : positives) {
            TrainingBatch b;
            b.query = q;
            b.positive = corpus[p];
            for (auto pick : sample_without_replacement(eligible.size(), n, rng)) {
                b.negatives.push_back(corpus[eligible[pick]]);
            }
            out.batches.push_back(std::move(b));
        }
    }
    return out;
}

std::string format_run(const RunRanking& run)
{
    std::ostringstream out;
    for (const auto& [qid, ranked] : run.entries) {
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            out << qid << " Q0 " << ranked[i].doc_id << ' ' << (i + 1) << ' '
                << format_fixed(ranked[i].score, 6) << ' ' << run.tag << '\n';
        }
    }
    return out.str();
}

void write_run(const RunRanking& run, const std::string& path)
{
    auto out = open_output(path);
    out << format_run(run);
}

RunRanking read_run(const std::string& path, std::vector<std::string>* warnings)
{
    auto in = open_input(path);
    struct Row {
        RankedDoc doc;
        long long rank;
    };
    std::map<std::string, std::vector<Row>> rows;
    RunRanking run;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_whitespace(line);
        if (fields.size() != 6) {
            throw DataError(line_prefix(line_no) + "expected 6 columns");
        }
        auto rank = parse_integer(fields[3]);
        auto score = parse_real(fields[4]);
        if (!rank || !score) {
            throw DataError(line_prefix(line_no) + "bad rank or score");
        }
        if (run.tag.empty()) {
            run.tag = std::string(fields[5]);
        }
        rows[std::string(fields[0])].push_back({{std::string(fields[2]), *score}, *rank});
    }
    for (auto& [qid, list] : rows) {
        bool contiguous = true;
        for (std::size_t i = 0; i < list.size(); ++i) {
            contiguous = contiguous && list[i].rank == static_cast<long long>(i + 1);
        }
        if (!contiguous) {
            std::stable_sort(list.begin(), list.end(),
                             [](const Row& a, const Row& b) { return a.doc.score > b.doc.score; });
            if (warnings) {
                warnings->push_back("query " + qid + ": rank column not contiguous, reordered by score");
            }
        }
        auto& ranked = run.entries[qid];
        for (auto& r : list) {
            ranked.push_back(std::move(r.doc));
        }
    }
    return run;
}

} // namespace eqir
