#pragma once

#include <string>
#include <tuple>

namespace fvqa {

/// One question-answer-image record. qid and split are assigned when the
/// bundle is finalized in canonical order.
struct Triplet {
    std::string qid;
    std::string image_id;
    std::string question;
    std::string answer;
    std::string answer_type;   // "binary" | "non_binary"
    std::string question_type; // template family, e.g. "is/are", "what {attribute}"
    std::string template_id;
    int tier = -1; // 0|1|2 for binary; -1 marks n/a (non-binary)
    std::string split;
    bool noise = false;
};

/// Canonical output order; makes sharding and qid assignment deterministic.
inline bool triplet_less(const Triplet& a, const Triplet& b) {
    return std::tie(a.split, a.answer_type, a.template_id, a.question, a.answer, a.image_id,
                    a.tier) < std::tie(b.split, b.answer_type, b.template_id, b.question, b.answer,
                                       b.image_id, b.tier);
}

} // namespace fvqa
