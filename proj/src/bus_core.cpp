#include "arinc429/bus_core.hpp"

#include <sstream>
#include <stdexcept>

#include "arinc429/word.hpp"

namespace arinc429 {

namespace {

constexpr uint16_t kAddressMask = 0x1FF;  // cpu_add[8:0]

uint32_t beat_mask(unsigned width) {
    return width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
}

}  // namespace

std::optional<RegisterInfo> register_map(uint8_t offset) {
    switch (offset) {
        case kOffTxControl:   return RegisterInfo{Register::TxControl, true, true, "TX_CONTROL"};
        case kOffTxStatus:    return RegisterInfo{Register::TxStatus, true, false, "TX_STATUS"};
        case kOffTxFifo:      return RegisterInfo{Register::TxFifo, false, true, "TX_FIFO"};
        case kOffRxControl:   return RegisterInfo{Register::RxControl, true, true, "RX_CONTROL"};
        case kOffRxStatus:    return RegisterInfo{Register::RxStatus, true, false, "RX_STATUS"};
        case kOffRxFifo:      return RegisterInfo{Register::RxFifo, true, false, "RX_FIFO"};
        case kOffTxFifoLevel: return RegisterInfo{Register::TxFifoLevel, true, true, "TX_FIFO_LEVEL"};
        case kOffRxFifoLevel: return RegisterInfo{Register::RxFifoLevel, true, true, "RX_FIFO_LEVEL"};
        case kOffLabelIndex:  return RegisterInfo{Register::LabelIndex, true, true, "LABEL_INDEX"};
        case kOffLabelEnable: return RegisterInfo{Register::LabelEnable, true, true, "LABEL_ENABLE"};
        default:              return std::nullopt;
    }
}

BusCore::BusCore(BusConfig config) : config_(config) {
    if (config_.cpu_data_width != 8 && config_.cpu_data_width != 16 &&
        config_.cpu_data_width != 32) {
        throw std::invalid_argument("cpu_data_width must be 8, 16 or 32");
    }
    if (config_.num_channels < 1 || config_.num_channels > 16) {
        throw std::invalid_argument("num_channels must be 1..16");
    }
    channels_.resize(config_.num_channels);
}

unsigned BusCore::beats_for(uint16_t address) const {
    const uint8_t offset = address & 0x1F;
    if (offset == kOffTxFifo || offset == kOffRxFifo) {
        return (kWordBits + config_.cpu_data_width - 1) / config_.cpu_data_width;
    }
    return 1;
}

AccessResult BusCore::cpu_access(const BusTransaction& txn) {
    const uint16_t address = txn.address & kAddressMask;
    const unsigned channel = address >> 5;
    const uint8_t offset = address & 0x1F;

    // A pending multi-beat access must be continued with the same kind and
    // address; anything else discards the partial word.
    bool aborted = false;
    if (partial_.active && (txn.kind != partial_.kind || address != partial_.address)) {
        partial_ = Partial{};
        aborted = true;
    }

    AccessResult result;
    const auto info = register_map(offset);
    if (channel >= config_.num_channels || !info) {
        result.outcome = AccessOutcome::UnmappedAddress;
        if (txn.kind == AccessKind::Read) result.data = 0;
    } else {
        ChannelBlock& block = channels_[channel];
        if (info->reg == Register::TxFifo || info->reg == Register::RxFifo) {
            result = fifo_port_access(block, txn, offset);
        } else if (txn.kind == AccessKind::Read) {
            result = register_read(block, offset);
        } else {
            result = register_write(block, offset, txn.data);
        }
    }

    if (aborted && result.outcome == AccessOutcome::Ok) {
        result.outcome = AccessOutcome::ProtocolViolation;
    }
    return result;
}

AccessResult BusCore::register_read(ChannelBlock& block, uint8_t offset) {
    AccessResult r;
    switch (offset) {
        case kOffTxControl:   r.data = block.tx.control(); break;
        case kOffTxStatus:    r.data = block.tx.read_status(); break;
        case kOffRxControl:   r.data = block.rx.control(); break;
        case kOffRxStatus:    r.data = block.rx.read_status(); break;
        case kOffTxFifoLevel: r.data = block.tx_level_reg; break;
        case kOffRxFifoLevel: r.data = block.rx_level_reg; break;
        case kOffLabelIndex:  r.data = block.label_index; break;
        case kOffLabelEnable: r.data = block.rx.label_enabled(block.label_index) ? 1u : 0u; break;
        default:
            r.data = 0;
            r.outcome = AccessOutcome::WriteOnlyRead;
            break;
    }
    return r;
}

AccessResult BusCore::register_write(ChannelBlock& block, uint8_t offset, uint32_t value) {
    AccessResult r;
    const uint8_t byte = static_cast<uint8_t>(value & 0xFF);
    switch (offset) {
        case kOffTxControl: block.tx.write_control(byte); break;
        case kOffRxControl: block.rx.write_control(byte); break;
        case kOffTxFifoLevel:
            block.tx_level_reg = byte;
            block.tx.set_fifo_level(byte == 0 ? WordFifo::kDefaultLevel : byte);
            break;
        case kOffRxFifoLevel:
            block.rx_level_reg = byte;
            block.rx.set_fifo_level(byte == 0 ? WordFifo::kDefaultLevel : byte);
            break;
        case kOffLabelIndex: block.label_index = byte; break;
        case kOffLabelEnable: block.rx.set_label(block.label_index, byte & 1u); break;
        default:
            r.outcome = AccessOutcome::ReadOnlyWrite;
            break;
    }
    return r;
}

AccessResult BusCore::fifo_port_access(ChannelBlock& block, const BusTransaction& txn,
                                       uint8_t offset) {
    AccessResult r;
    const bool is_tx = offset == kOffTxFifo;
    const AccessKind required = is_tx ? AccessKind::Write : AccessKind::Read;
    if (txn.kind != required) {
        if (txn.kind == AccessKind::Read) {
            r.data = 0;
            r.outcome = AccessOutcome::WriteOnlyRead;
        } else {
            r.outcome = AccessOutcome::ReadOnlyWrite;
        }
        return r;
    }

    const unsigned width = config_.cpu_data_width;
    const unsigned total = (kWordBits + width - 1) / width;
    const uint16_t address = txn.address & kAddressMask;

    if (!partial_.active) {
        partial_.active = true;
        partial_.kind = txn.kind;
        partial_.address = address;
        partial_.beats_done = 0;
        partial_.accum = 0;
        if (!is_tx) {
            // The word leaves the fifo on the first beat and is held while
            // the CPU clocks it out.
            if (auto word = block.rx.read_word()) {
                partial_.accum = word->raw;
            } else {
                r.outcome = AccessOutcome::FifoUnderflow;
            }
        }
    }

    const unsigned beat = partial_.beats_done;
    const unsigned shift = beat * width;
    if (is_tx) {
        partial_.accum |= (txn.data & beat_mask(width)) << shift;
    } else {
        r.data = (partial_.accum >> shift) & beat_mask(width);
    }
    partial_.beats_done = beat + 1;
    r.wait_beats = total - partial_.beats_done;

    if (partial_.beats_done == total) {
        if (is_tx) {
            if (block.tx.write_word(Arinc429Word{partial_.accum}) == PushResult::Overflow) {
                r.outcome = AccessOutcome::FifoOverflow;
            }
        }
        partial_ = Partial{};
    }
    return r;
}

InterruptState BusCore::aggregate_interrupts() const {
    InterruptState s;
    for (const ChannelBlock& block : channels_) {
        s.int_out_tx = s.int_out_tx || block.tx.interrupt();
        s.int_out_rx = s.int_out_rx || block.rx.interrupt();
    }
    s.int_out = s.int_out_rx || s.int_out_tx;
    return s;
}

std::vector<BusCore::TickEmission> BusCore::core_tick(int64_t now_ns) {
    std::vector<TickEmission> out;
    for (unsigned i = 0; i < channels_.size(); ++i) {
        while (auto e = channels_[i].tx.tick(now_ns)) {
            out.push_back(TickEmission{i, *e});
        }
    }
    return out;
}

std::string BusCore::state_snapshot() const {
    std::ostringstream os;
    os << "channels=" << config_.num_channels << "\n";
    for (unsigned i = 0; i < channels_.size(); ++i) {
        const ChannelBlock& b = channels_[i];
        os << "ch" << i << ".tx ctrl=" << unsigned(b.tx.control())
           << " status=" << unsigned(b.tx.peek_status())
           << " level=" << unsigned(b.tx_level_reg)
           << " started=" << b.tx.words_started() << " fifo=[";
        for (size_t k = 0; k < b.tx.fifo().contents().size(); ++k) {
            if (k) os << ' ';
            os << to_hex(b.tx.fifo().contents()[k]);
        }
        os << "]\n";
        os << "ch" << i << ".rx ctrl=" << unsigned(b.rx.control())
           << " status=" << unsigned(b.rx.peek_status())
           << " level=" << unsigned(b.rx_level_reg)
           << " label_index=" << unsigned(b.label_index) << " fifo=[";
        for (size_t k = 0; k < b.rx.fifo().contents().size(); ++k) {
            if (k) os << ' ';
            os << to_hex(b.rx.fifo().contents()[k]);
        }
        os << "] labels=";
        bool any = false;
        for (unsigned lab = 0; lab < 256; ++lab) {
            if (b.rx.label_enabled(static_cast<uint8_t>(lab))) {
                os << (any ? "," : "") << lab;
                any = true;
            }
        }
        if (!any) os << "-";
        os << "\n";
    }
    const InterruptState irq = aggregate_interrupts();
    os << "int_out_rx=" << irq.int_out_rx << " int_out_tx=" << irq.int_out_tx
       << " int_out=" << irq.int_out << "\n";
    return os.str();
}

}  // namespace arinc429
