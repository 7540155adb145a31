#include "fsdim/sequence.hpp"

#include "fsdim/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <fstream>
#include <iterator>

namespace fsdim {

namespace {

constexpr std::size_t kChunkBits = 1 << 16;

bool is_packed(const std::filesystem::path& path) { return path.extension() == ".bits"; }

class ChampernowneReader final : public BitReader {
public:
    std::size_t read(std::span<std::uint8_t> out) override {
        std::size_t written = 0;
        while (written < out.size()) {
            if (remaining_ == 0) {
                ++value_;
                remaining_ = std::bit_width(value_);
            }
            out[written++] = static_cast<std::uint8_t>((value_ >> (remaining_ - 1)) & 1u);
            --remaining_;
        }
        return written;
    }

private:
    // numeral "0" is one bit wide
    std::uint64_t value_ = 0;
    unsigned remaining_ = 1;
};

class ZerosReader final : public BitReader {
public:
    std::size_t read(std::span<std::uint8_t> out) override {
        std::fill(out.begin(), out.end(), 0);
        return out.size();
    }
};

class PeriodicReader final : public BitReader {
public:
    explicit PeriodicReader(const Bits& pattern) : pattern_(pattern) {}
    std::size_t read(std::span<std::uint8_t> out) override {
        for (auto& b : out) {
            b = pattern_[pos_];
            if (++pos_ == pattern_.size()) pos_ = 0;
        }
        return out.size();
    }

private:
    const Bits& pattern_;
    std::size_t pos_ = 0;
};

class DilutedReader final : public BitReader {
public:
    explicit DilutedReader(std::unique_ptr<BitReader> inner) : inner_(std::move(inner)) {}
    std::size_t read(std::span<std::uint8_t> out) override {
        std::size_t written = 0;
        std::array<std::uint8_t, 1> one{};
        while (written < out.size()) {
            if (index_ % 2 == 1) {
                out[written++] = 0;
                ++index_;
                continue;
            }
            if (inner_->read(one) == 0) break;
            out[written++] = one[0];
            ++index_;
        }
        return written;
    }

private:
    std::unique_ptr<BitReader> inner_;
    std::uint64_t index_ = 0;
};

class AsciiFileReader final : public BitReader {
public:
    explicit AsciiFileReader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error("cannot open bit file '" + path.string() + "'");
    }
    std::size_t read(std::span<std::uint8_t> out) override {
        std::size_t written = 0;
        char c;
        while (written < out.size() && in_.get(c)) {
            if (c == '0' || c == '1') {
                out[written++] = static_cast<std::uint8_t>(c - '0');
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                throw Error("bit file '" + path_.string() + "' contains non-binary character '" +
                            std::string(1, c) + "'");
            }
        }
        return written;
    }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

class PackedFileReader final : public BitReader {
public:
    explicit PackedFileReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw Error("cannot open bit file '" + path.string() + "'");
    }
    std::size_t read(std::span<std::uint8_t> out) override {
        std::size_t written = 0;
        while (written < out.size()) {
            if (bit_ == 8) {
                char c;
                if (!in_.get(c)) break;
                byte_ = static_cast<unsigned char>(c);
                bit_ = 0;
            }
            out[written++] = static_cast<std::uint8_t>((byte_ >> (7 - bit_)) & 1u);
            ++bit_;
        }
        return written;
    }

private:
    std::ifstream in_;
    unsigned byte_ = 0;
    unsigned bit_ = 8;
};

std::size_t count_file_bits(const std::filesystem::path& path) {
    if (is_packed(path)) {
        std::error_code ec;
        auto size = std::filesystem::file_size(path, ec);
        if (ec) throw Error("cannot open bit file '" + path.string() + "'");
        return static_cast<std::size_t>(size) * 8;
    }
    AsciiFileReader reader(path);
    Bits chunk(kChunkBits);
    std::size_t total = 0;
    while (std::size_t got = reader.read(chunk)) total += got;
    return total;
}

}  // namespace

Bits bits_from_string(std::string_view s) {
    Bits out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '0' || c == '1') {
            out.push_back(static_cast<std::uint8_t>(c - '0'));
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            throw Error("not a bit: '" + std::string(1, c) + "'");
        }
    }
    return out;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) s[i] = '1';
    return s;
}

BitSource BitSource::champernowne() {
    return BitSource(std::make_shared<const Node>(Node{Kind::champernowne, {}, {}, nullptr}));
}

BitSource BitSource::zeros() {
    return BitSource(std::make_shared<const Node>(Node{Kind::zeros, {}, {}, nullptr}));
}

BitSource BitSource::periodic(std::string_view pattern) {
    Bits bits = bits_from_string(pattern);
    if (bits.empty()) throw Error("periodic source needs a nonempty pattern");
    return BitSource(std::make_shared<const Node>(Node{Kind::periodic, std::move(bits), {}, nullptr}));
}

BitSource BitSource::diluted(BitSource inner) {
    return BitSource(std::make_shared<const Node>(
        Node{Kind::diluted, {}, {}, std::make_shared<const BitSource>(std::move(inner))}));
}

BitSource BitSource::file(std::filesystem::path path) {
    return BitSource(std::make_shared<const Node>(Node{Kind::file, {}, std::move(path), nullptr}));
}

BitSource BitSource::parse(std::string_view spec) {
    auto colon = spec.find(':');
    std::string_view head = spec.substr(0, colon);
    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    bool has_arg = colon != std::string_view::npos;

    if (head == "champernowne" && !has_arg) return champernowne();
    if (head == "zeros" && !has_arg) return zeros();
    if (head == "periodic" && has_arg) return periodic(rest);
    if (head == "diluted") return diluted(has_arg ? parse(rest) : champernowne());
    if (head == "file" && has_arg && !rest.empty()) return file(std::filesystem::path(rest));
    throw Error("unknown source '" + std::string(spec) +
                "' (expected champernowne, zeros, periodic:BITS, diluted[:INNER], file:PATH)");
}

const BitSource& BitSource::inner() const {
    if (!node_->inner) throw Error("source '" + describe() + "' has no inner source");
    return *node_->inner;
}

std::optional<std::size_t> BitSource::length_hint() const {
    switch (node_->kind) {
    case Kind::file:
        return count_file_bits(node_->path);
    case Kind::diluted: {
        auto inner_len = node_->inner->length_hint();
        if (!inner_len) return std::nullopt;
        // after the last inner bit comes its odd-index zero
        return *inner_len * 2;
    }
    default:
        return std::nullopt;
    }
}

std::string BitSource::describe() const {
    switch (node_->kind) {
    case Kind::champernowne: return "champernowne";
    case Kind::zeros: return "zeros";
    case Kind::periodic: return "periodic:" + bits_to_string(node_->pattern);
    case Kind::diluted: return "diluted:" + node_->inner->describe();
    case Kind::file: return "file:" + node_->path.string();
    }
    return {};
}

std::unique_ptr<BitReader> BitSource::reader() const {
    switch (node_->kind) {
    case Kind::champernowne: return std::make_unique<ChampernowneReader>();
    case Kind::zeros: return std::make_unique<ZerosReader>();
    case Kind::periodic: return std::make_unique<PeriodicReader>(node_->pattern);
    case Kind::diluted: return std::make_unique<DilutedReader>(node_->inner->reader());
    case Kind::file:
        if (is_packed(node_->path)) return std::make_unique<PackedFileReader>(node_->path);
        return std::make_unique<AsciiFileReader>(node_->path);
    }
    throw Error("unreachable source kind");
}

Bits generate(const BitSource& source, std::size_t n) {
    Bits out(n);
    auto reader = source.reader();
    std::size_t filled = 0;
    while (filled < n) {
        std::size_t want = std::min(kChunkBits, n - filled);
        std::size_t got = reader->read(std::span<std::uint8_t>(out).subspan(filled, want));
        filled += got;
        if (got < want) throw SourceExhausted(n, filled);
    }
    return out;
}

void write_bits_file(const std::filesystem::path& path, std::span<const std::uint8_t> bits) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    if (is_packed(path)) {
        for (std::size_t i = 0; i < bits.size(); i += 8) {
            unsigned byte = 0;
            for (std::size_t j = 0; j < 8; ++j) {
                byte <<= 1;
                if (i + j < bits.size() && bits[i + j]) byte |= 1u;
            }
            out.put(static_cast<char>(byte));
        }
    } else {
        out << bits_to_string(bits) << '\n';
    }
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace fsdim
