#include "advaudio/oracle.hpp"

namespace advaudio {

std::size_t ProbVector::top() const
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) {
            best = i;
        }
    }
    return best;
}

} // namespace advaudio
