#include "arinc429/word.hpp"

#include <bit>
#include <cstdio>
#include <stdexcept>

namespace arinc429 {

namespace {

uint8_t reverse8(uint8_t b) {
    b = static_cast<uint8_t>((b & 0xF0u) >> 4 | (b & 0x0Fu) << 4);
    b = static_cast<uint8_t>((b & 0xCCu) >> 2 | (b & 0x33u) << 2);
    b = static_cast<uint8_t>((b & 0xAAu) >> 1 | (b & 0x55u) << 1);
    return b;
}

}  // namespace

uint32_t compute_parity(uint32_t bits_1_to_31) {
    if (bits_1_to_31 > 0x7FFFFFFFu) {
        throw std::out_of_range("compute_parity: bits_1_to_31 does not fit in 31 bits");
    }
    return (std::popcount(bits_1_to_31) % 2 == 0) ? 1u : 0u;
}

Arinc429Word assemble(const WordFields& fields, bool parity_enabled) {
    if (fields.sdi > 3) throw std::out_of_range("assemble: sdi out of range (2 bits)");
    if (fields.data > 0x7FFFFu) throw std::out_of_range("assemble: data out of range (19 bits)");
    if (fields.ssm > 3) throw std::out_of_range("assemble: ssm out of range (2 bits)");
    if (fields.parity_bit > 1) throw std::out_of_range("assemble: parity_bit out of range (1 bit)");

    uint32_t raw = reverse8(fields.label);  // ARINC bit 1 = label MSB
    raw |= static_cast<uint32_t>(fields.sdi) << 8;
    raw |= fields.data << 10;
    raw |= static_cast<uint32_t>(fields.ssm) << 29;
    const uint32_t parity = parity_enabled ? compute_parity(raw) : fields.parity_bit;
    raw |= parity << 31;
    return Arinc429Word{raw};
}

WordFields disassemble(Arinc429Word word) {
    WordFields f;
    f.label = reverse8(static_cast<uint8_t>(word.raw & 0xFFu));
    f.sdi = static_cast<uint8_t>((word.raw >> 8) & 0x3u);
    f.data = (word.raw >> 10) & 0x7FFFFu;
    f.ssm = static_cast<uint8_t>((word.raw >> 29) & 0x3u);
    f.parity_bit = static_cast<uint8_t>(word.raw >> 31);
    return f;
}

bool check_parity(Arinc429Word word) {
    return std::popcount(word.raw) % 2 == 1;
}

std::string to_hex(Arinc429Word word) {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "0x%08X", word.raw);
    return buf;
}

std::string label_octal(uint8_t label) {
    char buf[4];
    std::snprintf(buf, sizeof(buf), "%03o", label);
    return buf;
}

}  // namespace arinc429
