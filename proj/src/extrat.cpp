#include "pvcsp/extrat.hpp"

#include <ostream>

namespace pvcsp {

ExtRat ExtRat::parse(std::string_view text) {
    if (text == "inf")
        return infinity();
    return ExtRat(Rat::parse(text));
}

std::ostream& operator<<(std::ostream& os, const ExtRat& e) { return os << e.str(); }

} // namespace pvcsp
