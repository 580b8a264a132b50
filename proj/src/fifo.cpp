#include "arinc429/fifo.hpp"

#include <stdexcept>

namespace arinc429 {

PushResult WordFifo::push(Arinc429Word word) {
    if (words_.size() >= kCapacity) return PushResult::Overflow;
    words_.push_back(word);
    return PushResult::Ok;
}

std::optional<Arinc429Word> WordFifo::pop() {
    if (words_.empty()) return std::nullopt;
    Arinc429Word w = words_.front();
    words_.pop_front();
    return w;
}

void WordFifo::set_level(size_t level) {
    if (level < 1 || level > kCapacity) {
        throw std::out_of_range("WordFifo::set_level: level must be in 1..512");
    }
    level_ = level;
}

}  // namespace arinc429
