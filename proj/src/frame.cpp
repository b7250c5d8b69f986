#include "flagprep/frame.hpp"

namespace flagprep {

FrameEffect propagate_frame(const Circuit& c, std::size_t pos, BitVector x, BitVector z) {
    FrameEffect e{BitVector(c.num_flags()), BitVector(c.num_code), BitVector(c.num_code)};
    for (std::size_t i = pos; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        switch (op.kind) {
            case OpKind::InitPlus:
            case OpKind::InitZero:
                x.set(op.a, false);
                z.set(op.a, false);
                break;
            case OpKind::CX:
                if (x.get(op.a)) x.flip(op.b);
                if (z.get(op.b)) z.flip(op.a);
                break;
            case OpKind::MeasZ:
                if (x.get(op.a)) e.flags.flip(op.flag_id);
                break;
            case OpKind::MeasX:
                if (z.get(op.a)) e.flags.flip(op.flag_id);
                break;
            default: break;
        }
    }
    for (std::size_t q = 0; q < c.num_code; ++q) {
        if (x.get(q)) e.x.set(q);
        if (z.get(q)) e.z.set(q);
    }
    return e;
}

}  // namespace flagprep
