#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsdim {

// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

Bits bits_from_string(std::string_view s);
std::string bits_to_string(std::span<const std::uint8_t> bits);

class BitReader {
public:
    virtual ~BitReader() = default;
    // Fills `out` from the front and returns how many bits were written.
    // A short count means the source is exhausted.
    virtual std::size_t read(std::span<std::uint8_t> out) = 0;
};

// Immutable description of a binary sequence. Copies share the description;
// every call to reader() starts an independent replay from bit 0.
class BitSource {
public:
    enum class Kind { champernowne, diluted, periodic, zeros, file };

    static BitSource champernowne();
    static BitSource zeros();
    static BitSource periodic(std::string_view pattern);
    static BitSource diluted(BitSource inner);
    static BitSource file(std::filesystem::path path);

    // Parses "champernowne", "zeros", "periodic:0110", "diluted:INNER", "file:PATH".
    static BitSource parse(std::string_view spec);

    Kind kind() const noexcept { return node_->kind; }
    // Number of bits available, or nullopt when unbounded.
    std::optional<std::size_t> length_hint() const;
    std::string describe() const;

    std::unique_ptr<BitReader> reader() const;

    const BitSource& inner() const;
    const Bits& pattern() const { return node_->pattern; }
    const std::filesystem::path& path() const { return node_->path; }

private:
    struct Node {
        Kind kind;
        Bits pattern;
        std::filesystem::path path;
        std::shared_ptr<const BitSource> inner;
    };
    explicit BitSource(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

// Exactly n bits of the source. Throws SourceExhausted when a finite source is shorter.
Bits generate(const BitSource& source, std::size_t n);

// Writes bits in the file-source format chosen by extension: packed for ".bits",
// ASCII '0'/'1' otherwise.
void write_bits_file(const std::filesystem::path& path, std::span<const std::uint8_t> bits);

}  // namespace fsdim
