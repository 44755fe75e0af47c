#include "eqir/encoder.hpp"

#include "eqir/common.hpp"
#include "eqir/text_analysis.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace eqir {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::string_view kMagic = "EQIR1";

template <typename T>
void append_raw(std::string& out, T value)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(std::string_view bytes, std::size_t& offset)
{
    if (offset + sizeof(T) > bytes.size()) {
        throw DataError("checkpoint truncated");
    }
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

} // namespace

Vocabulary::Vocabulary()
{
    add(std::string(kUnkToken));
}

std::size_t Vocabulary::id(std::string_view token) const
{
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? 0 : it->second;
}

std::vector<std::size_t> Vocabulary::encode_text(std::string_view text) const
{
    std::vector<std::size_t> out;
    for (const auto& term : index_terms(text)) {
        out.push_back(id(term));
    }
    return out;
}

std::size_t Vocabulary::add(const std::string& token)
{
    auto [it, inserted] = ids_.emplace(token, tokens_.size());
    if (inserted) {
        tokens_.push_back(token);
    }
    return it->second;
}

void Vocabulary::save(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out << tokens_[i] << '\t' << i << '\n';
    }
}

Vocabulary Vocabulary::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    Vocabulary v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fields = split(line, '\t');
        if (fields.size() != 2) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected token<TAB>id");
        }
        const std::string token(fields[0]);
        const std::size_t expected = std::stoull(std::string(fields[1]));
        if (line_no == 1) {
            if (token != kUnkToken || expected != 0) {
                throw DataError(path + ": first entry must be " + std::string(kUnkToken) + "\t0");
            }
            continue;
        }
        if (v.add(token) != expected) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": ids must be dense");
        }
    }
    return v;
}

Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count)
{
    if (min_count < 1) {
        throw UsageError("min_count must be >= 1");
    }
    std::map<std::string, std::size_t> freq;
    for (const auto& text : texts) {
        for (auto& term : index_terms(text)) {
            ++freq[term];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [term, count] : ranked) {
        if (count >= min_count && term != kUnkToken) {
            v.add(term);
        }
    }
    return v;
}

Vocabulary build_vocab(const std::vector<Document>& corpus, const std::vector<Query>& queries,
                       std::size_t min_count)
{
    std::vector<std::string> texts;
    texts.reserve(corpus.size() + queries.size());
    for (const auto& d : corpus) {
        texts.push_back(d.full_text());
    }
    for (const auto& q : queries) {
        texts.push_back(q.text);
    }
    return build_vocab(texts, min_count);
}

EncoderParams init_params(std::size_t vocab_size, std::size_t dim, std::uint64_t seed, Role role)
{
    if (dim < 2) {
        throw UsageError("embedding dimension must be >= 2");
    }
    EncoderParams p;
    p.dim = dim;
    p.role = role;
    p.query_embeddings = Matrix(vocab_size, dim);
    p.doc_embeddings = Matrix(vocab_size, dim);
    Rng rng(seed);
    const double scale = 0.5 / static_cast<double>(dim);
    for (auto* m : {&p.query_embeddings, &p.doc_embeddings}) {
        for (auto& x : m->data()) {
            x = (2.0 * uniform_unit(rng) - 1.0) * scale;
        }
    }
    return p;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

std::vector<double> encode_ids(const EncoderParams& params, std::span<const std::size_t> ids,
                               Side side)
{
    std::vector<double> h(params.dim, 0.0);
    if (ids.empty()) {
        return h;
    }
    const auto& table = params.table(side);
    for (auto id : ids) {
        auto row = table.row(id);
        for (std::size_t k = 0; k < params.dim; ++k) {
            h[k] += row[k];
        }
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (auto& x : h) {
        x *= inv;
    }
    return h;
}

std::vector<double> encode(const EncoderParams& params, const Vocabulary& vocab,
                           std::string_view text, Side side)
{
    const auto ids = vocab.encode_text(text);
    return encode_ids(params, ids, side);
}

EncodedBatch encode_batch(const Vocabulary& vocab, const TrainingBatch& batch)
{
    EncodedBatch out;
    out.query = vocab.encode_text(batch.query.text);
    out.candidates.push_back(vocab.encode_text(batch.positive.full_text()));
    for (const auto& d : batch.negatives) {
        out.candidates.push_back(vocab.encode_text(d.full_text()));
    }
    return out;
}

std::vector<EncodedBatch> encode_batches(const Vocabulary& vocab,
                                         const std::vector<TrainingBatch>& batches)
{
    std::vector<EncodedBatch> out;
    out.reserve(batches.size());
    for (std::size_t i = 0; i < batches.size(); ++i) {
        out.push_back(encode_batch(vocab, batches[i]));
        out.back().source = i;
    }
    return out;
}

CandidateLogits score_batch(const EncoderParams& params, const EncodedBatch& batch)
{
    const auto hq = encode_ids(params, batch.query, Side::query);
    CandidateLogits out;
    out.values.reserve(batch.candidates.size());
    for (const auto& doc : batch.candidates) {
        out.values.push_back(dot(hq, encode_ids(params, doc, Side::document)));
    }
    return out;
}

CandidateLogits score_batch(const EncoderParams& params, const Vocabulary& vocab,
                            const TrainingBatch& batch)
{
    return score_batch(params, encode_batch(vocab, batch));
}

std::string serialize_params(const EncoderParams& params)
{
    std::string out(kMagic);
    append_raw<std::uint64_t>(out, params.vocab_size());
    append_raw<std::uint64_t>(out, params.dim);
    append_raw<std::uint8_t>(out, static_cast<std::uint8_t>(params.role));
    for (const auto* m : {&params.query_embeddings, &params.doc_embeddings}) {
        for (double x : m->data()) {
            append_raw<double>(out, x);
        }
    }
    return out;
}

EncoderParams deserialize_params(std::string_view bytes)
{
    if (!bytes.starts_with(kMagic)) {
        throw DataError("not an EQIR1 checkpoint");
    }
    std::size_t offset = kMagic.size();
    const auto vocab = read_raw<std::uint64_t>(bytes, offset);
    const auto dim = read_raw<std::uint64_t>(bytes, offset);
    const auto role = read_raw<std::uint8_t>(bytes, offset);
    if (role > 1 || dim < 2) {
        throw DataError("corrupt checkpoint header");
    }
    if (bytes.size() - offset != 2 * vocab * dim * sizeof(double)) {
        throw DataError("checkpoint size does not match header");
    }
    EncoderParams p;
    p.dim = dim;
    p.role = static_cast<Role>(role);
    p.frozen = p.role == Role::biased;
    p.query_embeddings = Matrix(vocab, dim);
    p.doc_embeddings = Matrix(vocab, dim);
    for (auto* m : {&p.query_embeddings, &p.doc_embeddings}) {
        for (auto& x : m->data()) {
            x = read_raw<double>(bytes, offset);
        }
    }
    return p;
}

void save_params(const EncoderParams& params, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    const auto bytes = serialize_params(params);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

EncoderParams load_params(const std::string& path)
{
    return deserialize_params(read_file(path));
}

std::string params_digest(const EncoderParams& params)
{
    return fnv1a_hex(serialize_params(params));
}

} // namespace eqir
