#include "doctest.h"

#include "fsdim/error.hpp"
#include "fsdim/sequence.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>

using namespace fsdim;

TEST_CASE("champernowne prefix matches concatenated numerals") {
    CHECK(bits_to_string(generate(BitSource::champernowne(), 10)) == "0110111001");
    CHECK(bits_to_string(generate(BitSource::champernowne(), 5000)) == testing::champernowne_oracle(5000));
}

TEST_CASE("periodic and zeros") {
    CHECK(bits_to_string(generate(BitSource::periodic("01"), 5)) == "01010");
    CHECK(bits_to_string(generate(BitSource::zeros(), 4)) == "0000");
    CHECK(generate(BitSource::zeros(), 0).empty());
    CHECK_THROWS_AS(BitSource::periodic(""), Error);
}

TEST_CASE("diluted interleaves the inner source with zeros") {
    CHECK(bits_to_string(generate(BitSource::diluted(BitSource::champernowne()), 8)) == "00101000");

    for (auto inner : {BitSource::champernowne(), BitSource::periodic("1"), BitSource::periodic("110")}) {
        auto inner_bits = generate(inner, 500);
        auto d = generate(BitSource::diluted(inner), 1000);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (i % 2 == 1) CHECK(d[i] == 0);
            else CHECK(d[i] == inner_bits[i / 2]);
        }
    }
}

TEST_CASE("generation is a deterministic prefix-closed replay") {
    for (const char* spec : {"champernowne", "zeros", "periodic:0110", "diluted:champernowne",
                             "diluted:diluted:periodic:1"}) {
        auto src = BitSource::parse(spec);
        CHECK(src.describe() == spec);
        auto a = generate(src, 3000);
        auto b = generate(src, 3000);
        CHECK(a == b);
        for (std::size_t n : {0u, 1u, 17u, 1024u, 2999u}) {
            auto p = generate(src, n);
            CHECK(std::equal(p.begin(), p.end(), a.begin()));
        }
    }
}

TEST_CASE("parse rejects unknown kinds") {
    CHECK_THROWS_AS(BitSource::parse("pi"), Error);
    CHECK_THROWS_AS(BitSource::parse("periodic:01x"), Error);
    CHECK(BitSource::parse("diluted").describe() == "diluted:champernowne");
}

TEST_CASE("file sources: ascii and packed") {
    auto dir = std::filesystem::temp_directory_path() / "fsdim_test_sequence";
    std::filesystem::create_directories(dir);

    auto ascii = dir / "x.txt";
    {
        std::ofstream f(ascii);
        f << "0110 1\n10\t01\n";
    }
    auto src = BitSource::file(ascii);
    CHECK(src.length_hint() == 9u);
    CHECK(bits_to_string(generate(src, 9)) == "011011001");

    SUBCASE("short file reports the shortfall") {
        try {
            generate(src, 12);
            FAIL("expected SourceExhausted");
        } catch (const SourceExhausted& e) {
            CHECK(e.requested() == 12);
            CHECK(e.available() == 9);
            CHECK(std::string(e.what()).find("short by 3") != std::string::npos);
        }
    }

    SUBCASE("packed round trip, most significant bit first") {
        auto packed = dir / "x.bits";
        Bits bits = bits_from_string("1000000101");
        write_bits_file(packed, bits);
        CHECK(std::filesystem::file_size(packed) == 2);
        auto back = generate(BitSource::file(packed), 16);
        CHECK(bits_to_string(back) == "1000000101000000");
        std::ifstream in(packed, std::ios::binary);
        CHECK(in.get() == 0x81);
    }

    SUBCASE("diluted file source") {
        auto d = BitSource::diluted(src);
        CHECK(d.length_hint() == 18u);
        CHECK(bits_to_string(generate(d, 6)) == "001010");
    }

    SUBCASE("non-binary characters are rejected") {
        auto bad = dir / "bad.txt";
        std::ofstream(bad) << "01a1";
        CHECK_THROWS_AS(generate(BitSource::file(bad), 3), Error);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(generate(BitSource::file(dir / "nope.txt"), 1), Error);
    }
}

TEST_CASE("readers are independent") {
    auto src = BitSource::champernowne();
    auto r1 = src.reader();
    auto r2 = src.reader();
    Bits a(100), b(50), c(50);
    r1->read(a);
    r2->read(b);
    r2->read(c);
    b.insert(b.end(), c.begin(), c.end());
    CHECK(a == b);
}
