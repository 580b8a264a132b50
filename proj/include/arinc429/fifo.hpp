// fifo.hpp -- 512-word FIFO with programmable watermark.

#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include "arinc429/word.hpp"

namespace arinc429 {

enum class PushResult : uint8_t { Ok, Overflow };

// Holds up to 512 ARINC words. The half_full flag asserts while occupancy
// is at or above the programmed level (default 256). A push into a full
// FIFO drops the incoming word and reports Overflow; stored words are
// never corrupted.
class WordFifo {
public:
    static constexpr size_t kCapacity = 512;
    static constexpr size_t kDefaultLevel = 256;

    struct Flags {
        bool empty = true;
        bool half_full = false;
        bool full = false;

        friend bool operator==(const Flags&, const Flags&) = default;
    };

    PushResult push(Arinc429Word word);
    std::optional<Arinc429Word> pop();

    // Watermark must be in 1..512; throws std::out_of_range otherwise.
    void set_level(size_t level);
    size_t level() const { return level_; }

    size_t size() const { return words_.size(); }
    Flags flags() const {
        return {words_.empty(), words_.size() >= level_, words_.size() >= kCapacity};
    }
    void clear() { words_.clear(); }

    const std::deque<Arinc429Word>& contents() const { return words_; }

private:
    std::deque<Arinc429Word> words_;
    size_t level_ = kDefaultLevel;
};

}  // namespace arinc429
