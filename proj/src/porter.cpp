#include "trendkit/porter.hpp"

#include <cstring>

namespace trendkit::text {
namespace {

// Working buffer for one word. b[0..k] is the current word; j marks the end
// of the stem after a successful ends() match.
struct Stem {
    std::string b;
    int k = 0;
    int j = 0;

    bool cons(int i) const {
        switch (b[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return (i == 0) ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of consonant-vowel sequences in b[0..j]:
    // <c><v> -> 0, <c>vc<v> -> 1, <c>vcvc<v> -> 2, ...
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int i) const {
        if (i < 1) return false;
        if (b[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i - 1)]) return false;
        return cons(i);
    }

    // cvc(i) is true when i-2,i-1,i is consonant-vowel-consonant and the
    // final consonant is not w, x or y; used to restore a trailing e.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k + 1) return false;
        if (std::memcmp(b.data() + (k - len + 1), s.data(), s.size()) != 0) return false;
        j = k - len;
        return true;
    }

    // Overwrites the matched suffix with s.
    void set_to(std::string_view s) {
        b.resize(static_cast<std::size_t>(j + 1));
        b.append(s);
        k = j + static_cast<int>(s.size());
    }

    void r(std::string_view s) {
        if (m() > 0) set_to(s);
    }
};

// step1ab removes plurals and -ed / -ing: caresses -> caress, ponies -> poni,
// agreed -> agree, matting -> mat, mating -> mate.
void step1ab(Stem& z) {
    if (z.b[static_cast<std::size_t>(z.k)] == 's') {
        if (z.ends("sses")) {
            z.k -= 2;
        } else if (z.ends("ies")) {
            z.set_to("i");
        } else if (z.b[static_cast<std::size_t>(z.k - 1)] != 's') {
            --z.k;
        }
    }
    if (z.ends("eed")) {
        if (z.m() > 0) --z.k;
    } else if ((z.ends("ed") || z.ends("ing")) && z.vowel_in_stem()) {
        z.k = z.j;
        if (z.ends("at")) {
            z.set_to("ate");
        } else if (z.ends("bl")) {
            z.set_to("ble");
        } else if (z.ends("iz")) {
            z.set_to("ize");
        } else if (z.doublec(z.k)) {
            --z.k;
            const char ch = z.b[static_cast<std::size_t>(z.k)];
            if (ch == 'l' || ch == 's' || ch == 'z') ++z.k;
        } else if (z.m() == 1 && z.cvc(z.k)) {
            z.j = z.k;
            z.set_to("e");
        }
    }
}

// step1c turns terminal y to i when there is another vowel in the stem.
void step1c(Stem& z) {
    if (z.ends("y") && z.vowel_in_stem())
        z.b[static_cast<std::size_t>(z.k)] = 'i';
}

// step2 maps double suffixes to single ones (-ization -> -ize etc.) when the
// preceding stem has m() > 0.
void step2(Stem& z) {
    if (z.k < 1) return; // no step-2 suffix fits a one-letter word
    switch (z.b[static_cast<std::size_t>(z.k - 1)]) {
        case 'a':
            if (z.ends("ational")) { z.r("ate"); break; }
            if (z.ends("tional")) { z.r("tion"); break; }
            break;
        case 'c':
            if (z.ends("enci")) { z.r("ence"); break; }
            if (z.ends("anci")) { z.r("ance"); break; }
            break;
        case 'e':
            if (z.ends("izer")) { z.r("ize"); break; }
            break;
        case 'l':
            if (z.ends("bli")) { z.r("ble"); break; } // departure: abli->able in the paper
            if (z.ends("alli")) { z.r("al"); break; }
            if (z.ends("entli")) { z.r("ent"); break; }
            if (z.ends("eli")) { z.r("e"); break; }
            if (z.ends("ousli")) { z.r("ous"); break; }
            break;
        case 'o':
            if (z.ends("ization")) { z.r("ize"); break; }
            if (z.ends("ation")) { z.r("ate"); break; }
            if (z.ends("ator")) { z.r("ate"); break; }
            break;
        case 's':
            if (z.ends("alism")) { z.r("al"); break; }
            if (z.ends("iveness")) { z.r("ive"); break; }
            if (z.ends("fulness")) { z.r("ful"); break; }
            if (z.ends("ousness")) { z.r("ous"); break; }
            break;
        case 't':
            if (z.ends("aliti")) { z.r("al"); break; }
            if (z.ends("iviti")) { z.r("ive"); break; }
            if (z.ends("biliti")) { z.r("ble"); break; }
            break;
        case 'g':
            if (z.ends("logi")) { z.r("log"); break; } // departure: not in the paper
            break;
    }
}

// step3 handles -ic-, -full, -ness etc.
void step3(Stem& z) {
    switch (z.b[static_cast<std::size_t>(z.k)]) {
        case 'e':
            if (z.ends("icate")) { z.r("ic"); break; }
            if (z.ends("ative")) { z.r(""); break; }
            if (z.ends("alize")) { z.r("al"); break; }
            break;
        case 'i':
            if (z.ends("iciti")) { z.r("ic"); break; }
            break;
        case 'l':
            if (z.ends("ical")) { z.r("ic"); break; }
            if (z.ends("ful")) { z.r(""); break; }
            break;
        case 's':
            if (z.ends("ness")) { z.r(""); break; }
            break;
    }
}

// step4 takes off -ant, -ence etc. in context <c>vcvc<v>.
void step4(Stem& z) {
    if (z.k < 1) return;
    switch (z.b[static_cast<std::size_t>(z.k - 1)]) {
        case 'a':
            if (z.ends("al")) break;
            return;
        case 'c':
            if (z.ends("ance")) break;
            if (z.ends("ence")) break;
            return;
        case 'e':
            if (z.ends("er")) break;
            return;
        case 'i':
            if (z.ends("ic")) break;
            return;
        case 'l':
            if (z.ends("able")) break;
            if (z.ends("ible")) break;
            return;
        case 'n':
            if (z.ends("ant")) break;
            if (z.ends("ement")) break;
            if (z.ends("ment")) break;
            if (z.ends("ent")) break;
            return;
        case 'o':
            if (z.ends("ion") && (z.b[static_cast<std::size_t>(z.j)] == 's' ||
                                  z.b[static_cast<std::size_t>(z.j)] == 't')) break;
            if (z.ends("ou")) break; // takes care of -ous
            return;
        case 's':
            if (z.ends("ism")) break;
            return;
        case 't':
            if (z.ends("ate")) break;
            if (z.ends("iti")) break;
            return;
        case 'u':
            if (z.ends("ous")) break;
            return;
        case 'v':
            if (z.ends("ive")) break;
            return;
        case 'z':
            if (z.ends("ize")) break;
            return;
        default:
            return;
    }
    if (z.m() > 1) z.k = z.j;
}

// step5 removes a final -e if m() > 1 (or m() == 1 without cvc), and maps
// -ll to -l if m() > 1.
void step5(Stem& z) {
    z.j = z.k;
    if (z.b[static_cast<std::size_t>(z.k)] == 'e') {
        const int a = z.m();
        if (a > 1 || (a == 1 && !z.cvc(z.k - 1))) --z.k;
    }
    if (z.b[static_cast<std::size_t>(z.k)] == 'l' && z.doublec(z.k) && z.m() > 1)
        --z.k;
}

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word); // length 1-2 words are not stemmed

    Stem z;
    z.b.assign(word);
    z.k = static_cast<int>(word.size()) - 1;

    step1ab(z);
    step1c(z);
    step2(z);
    step3(z);
    step4(z);
    step5(z);

    z.b.resize(static_cast<std::size_t>(z.k + 1));
    return z.b;
}

} // namespace trendkit::text
