// word.hpp -- ARINC 429 32-bit word assembly, disassembly and odd parity.
//
// Bit numbering convention: ARINC bit n lives at binary position n-1 of the
// raw word, so ARINC bit 1 is the LSB and ARINC bit 32 (the parity bit) is
// the MSB. The 8-bit label is transmitted MSB-first, i.e. it is stored
// bit-reversed in ARINC bits 1-8.

#pragma once

#include <cstdint>
#include <string>

namespace arinc429 {

struct Arinc429Word {
    uint32_t raw = 0;

    friend bool operator==(const Arinc429Word&, const Arinc429Word&) = default;
};

// Decoded field view of a word. `label` is conventionally displayed in octal.
struct WordFields {
    uint8_t label = 0;       // 8 bits, ARINC bits 1-8 (bit-reversed)
    uint8_t sdi = 0;         // 2 bits, ARINC bits 9-10
    uint32_t data = 0;       // 19 bits, ARINC bits 11-29 (LSB at bit 11)
    uint8_t ssm = 0;         // 2 bits, ARINC bits 30-31
    uint8_t parity_bit = 0;  // ARINC bit 32, used verbatim when parity is disabled

    friend bool operator==(const WordFields&, const WordFields&) = default;
};

inline constexpr unsigned kWordBits = 32;

// Raw-word masks of the five fields. They partition 0xFFFFFFFF.
inline constexpr uint32_t kLabelMask = 0x000000FFu;
inline constexpr uint32_t kSdiMask = 0x00000300u;
inline constexpr uint32_t kDataMask = 0x1FFFFC00u;
inline constexpr uint32_t kSsmMask = 0x60000000u;
inline constexpr uint32_t kParityMask = 0x80000000u;

// Parity bit that makes the full 32-bit word odd: 1 if the population count
// of ARINC bits 1-31 is even, else 0. Throws std::out_of_range if the input
// does not fit in 31 bits.
uint32_t compute_parity(uint32_t bits_1_to_31);

// Packs fields into a raw word. With parity enabled, ARINC bit 32 is
// computed from bits 1-31; otherwise fields.parity_bit is used verbatim.
// Throws std::out_of_range naming the offending field if one is too wide.
Arinc429Word assemble(const WordFields& fields, bool parity_enabled);

// Exact inverse of assemble with parity disabled; parity_bit carries ARINC
// bit 32 verbatim.
WordFields disassemble(Arinc429Word word);

// True iff the population count of the raw word is odd.
bool check_parity(Arinc429Word word);

// Rendering helpers: "0x" + exactly 8 uppercase hex digits; 3 octal digits.
std::string to_hex(Arinc429Word word);
std::string label_octal(uint8_t label);

}  // namespace arinc429
