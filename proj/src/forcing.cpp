#include "causord/forcing.hpp"

#include <cctype>

#include "causord/errors.hpp"

namespace causord::forcing {

namespace {

PropPtr node(Prop p) { return std::make_shared<const Prop>(std::move(p)); }

}  // namespace

PropPtr atom(std::string name) {
  return node({PropKind::Atom, std::move(name), "", "", nullptr, nullptr});
}

PropPtr prec(std::string a, std::string b) {
  if (a == b)
    throw SemanticError("order proposition needs two distinct parties, got '" +
                        a + "<" + b + "'");
  return node({PropKind::Prec, "", std::move(a), std::move(b), nullptr,
               nullptr});
}

PropPtr bottom() {
  return node({PropKind::Bottom, "", "", "", nullptr, nullptr});
}

PropPtr conj(PropPtr l, PropPtr r) {
  return node({PropKind::And, "", "", "", std::move(l), std::move(r)});
}

PropPtr disj(PropPtr l, PropPtr r) {
  return node({PropKind::Or, "", "", "", std::move(l), std::move(r)});
}

PropPtr implies(PropPtr l, PropPtr r) {
  return node({PropKind::Implies, "", "", "", std::move(l), std::move(r)});
}

PropPtr neg(PropPtr p) { return implies(std::move(p), bottom()); }

// ---------------------------------------------------------------------------
// Surface-syntax parser.

namespace {

enum class Tok { Ident, Less, Tilde, Amp, Pipe, Arrow, LPar, RPar, False, End };

struct Lexer {
  const std::string& s;
  size_t i = 0;
  Tok tok = Tok::End;
  std::string ident;
  size_t tok_col = 1;

  explicit Lexer(const std::string& text) : s(text) { next(); }

  void next() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    tok_col = i + 1;
    if (i >= s.size()) {
      tok = Tok::End;
      return;
    }
    char c = s[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      ident = s.substr(i, j - i);
      i = j;
      tok = ident == "false" ? Tok::False : Tok::Ident;
      return;
    }
    switch (c) {
      case '<': tok = Tok::Less; ++i; return;
      case '~': tok = Tok::Tilde; ++i; return;
      case '&': tok = Tok::Amp; ++i; return;
      case '|': tok = Tok::Pipe; ++i; return;
      case '(': tok = Tok::LPar; ++i; return;
      case ')': tok = Tok::RPar; ++i; return;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          tok = Tok::Arrow;
          i += 2;
          return;
        }
        throw ParseError("expected '->' in proposition", 0, tok_col);
      default:
        throw ParseError(std::string("unexpected character '") + c +
                             "' in proposition",
                         0, tok_col);
    }
  }
};

PropPtr parse_imp(Lexer& lx);

PropPtr parse_primary(Lexer& lx) {
  switch (lx.tok) {
    case Tok::False: {
      lx.next();
      return bottom();
    }
    case Tok::Ident: {
      std::string first = lx.ident;
      lx.next();
      if (lx.tok == Tok::Less) {
        lx.next();
        if (lx.tok != Tok::Ident)
          throw ParseError("expected party name after '<'", 0, lx.tok_col);
        std::string second = lx.ident;
        lx.next();
        return prec(first, second);
      }
      return atom(first);
    }
    case Tok::LPar: {
      lx.next();
      PropPtr p = parse_imp(lx);
      if (lx.tok != Tok::RPar)
        throw ParseError("expected ')'", 0, lx.tok_col);
      lx.next();
      return p;
    }
    default:
      throw ParseError("expected proposition", 0, lx.tok_col);
  }
}

PropPtr parse_unary(Lexer& lx) {
  if (lx.tok == Tok::Tilde) {
    lx.next();
    return neg(parse_unary(lx));
  }
  return parse_primary(lx);
}

PropPtr parse_and(Lexer& lx) {
  PropPtr p = parse_unary(lx);
  while (lx.tok == Tok::Amp) {
    lx.next();
    p = conj(p, parse_unary(lx));
  }
  return p;
}

PropPtr parse_or(Lexer& lx) {
  PropPtr p = parse_and(lx);
  while (lx.tok == Tok::Pipe) {
    lx.next();
    p = disj(p, parse_and(lx));
  }
  return p;
}

PropPtr parse_imp(Lexer& lx) {
  PropPtr l = parse_or(lx);
  if (lx.tok == Tok::Arrow) {
    lx.next();
    return implies(l, parse_imp(lx));  // right-associative
  }
  return l;
}

// Rendering precedence: -> 1, | 2, & 3, ~ 4, leaves 5.
std::string render(const PropPtr& p, int need) {
  std::string s;
  int mine;
  if (p->kind == PropKind::Implies && p->r->kind == PropKind::Bottom) {
    mine = 4;
    s = "~" + render(p->l, 4);
  } else {
    switch (p->kind) {
      case PropKind::Atom: mine = 5; s = p->name; break;
      case PropKind::Prec: mine = 5; s = p->a + "<" + p->b; break;
      case PropKind::Bottom: mine = 5; s = "false"; break;
      case PropKind::And:
        mine = 3;
        s = render(p->l, 3) + " & " + render(p->r, 4);
        break;
      case PropKind::Or:
        mine = 2;
        s = render(p->l, 2) + " | " + render(p->r, 3);
        break;
      case PropKind::Implies:
      default:
        mine = 1;
        s = render(p->l, 2) + " -> " + render(p->r, 1);
        break;
    }
  }
  return mine < need ? "(" + s + ")" : s;
}

}  // namespace

PropPtr parse_prop(const std::string& text) {
  Lexer lx(text);
  PropPtr p = parse_imp(lx);
  if (lx.tok != Tok::End)
    throw ParseError("trailing input after proposition", 0, lx.tok_col);
  return p;
}

std::string prop_str(const PropPtr& p) { return render(p, 1); }

// ---------------------------------------------------------------------------
// KripkeModel.

KripkeModel::KripkeModel(contexts::OrderContextPoset poset)
    : poset_(std::move(poset)) {}

KripkeModel default_order_valuation(contexts::OrderContextPoset poset) {
  return KripkeModel(std::move(poset));
}

std::vector<bool> KripkeModel::to_mask(
    const std::set<std::string>& at) const {
  std::vector<bool> mask(poset_.size(), false);
  for (const auto& name : at) mask[poset_.index_of(name)] = true;
  return mask;
}

std::vector<bool> KripkeModel::close_up(const std::string& key,
                                        std::vector<bool> mask, Closure how) {
  if (how == Closure::Raw) return mask;
  std::vector<bool> closed(poset_.size(), false);
  for (int c = 0; c < poset_.size(); ++c)
    if (mask[c])
      for (int d : poset_.upset_indices(c)) closed[d] = true;
  if (closed != mask) {
    if (how == Closure::Strict)
      throw MonotonicityError("context set for '" + key +
                              "' is not upward closed");
    warnings_.push_back("context set for '" + key +
                        "' was not upward closed; closed automatically");
  }
  return closed;
}

void KripkeModel::declare_atom(const std::string& key,
                               const std::set<std::string>& at, Closure how) {
  atom_forced_[key] = close_up(key, to_mask(at), how);
}

void KripkeModel::declare_posed(const std::string& key,
                                const std::set<std::string>& at, Closure how) {
  posed_[key] = close_up(key, to_mask(at), how);
}

const std::vector<bool>* KripkeModel::find_posed(
    const std::string& key) const {
  auto it = posed_.find(key);
  return it == posed_.end() ? nullptr : &it->second;
}

bool KripkeModel::forces(int c, const PropPtr& p) const {
  switch (p->kind) {
    case PropKind::Atom: {
      auto it = atom_forced_.find(p->name);
      if (it != atom_forced_.end()) return it->second[c];
      if (find_posed(p->name)) return false;  // declared posed, never forced
      throw UnknownAtomError("unknown atom '" + p->name + "'");
    }
    case PropKind::Prec: {
      const auto& order = poset_.at(c).order;
      return order.before(order.index_of(p->a), order.index_of(p->b));
    }
    case PropKind::Bottom:
      return false;
    case PropKind::And:
      return forces(c, p->l) && forces(c, p->r);
    case PropKind::Or:
      return forces(c, p->l) || forces(c, p->r);
    case PropKind::Implies:
    default:
      for (int d : poset_.upset_indices(c))
        if (forces(d, p->l) && !forces(d, p->r)) return false;
      return true;
  }
}

bool KripkeModel::forces(const std::string& c, const PropPtr& p) const {
  return forces(poset_.index_of(c), p);
}

bool KripkeModel::posed_at(int c, const PropPtr& p) const {
  switch (p->kind) {
    case PropKind::Atom: {
      const auto* mask = find_posed(p->name);
      if (mask) return (*mask)[c];
      if (atom_forced_.count(p->name) == 0)
        throw UnknownAtomError("unknown atom '" + p->name + "'");
      return true;  // default: posed everywhere
    }
    case PropKind::Prec: {
      // Validate the party names against the shared universe.
      const auto& order = poset_.at(c).order;
      order.index_of(p->a);
      order.index_of(p->b);
      const auto* mask = find_posed(p->a + "<" + p->b);
      return mask ? (*mask)[c] : true;
    }
    case PropKind::Bottom:
      return true;
    case PropKind::And:
    case PropKind::Or:
    case PropKind::Implies:
    default:
      return posed_at(c, p->l) && posed_at(c, p->r);
  }
}

bool KripkeModel::indeterminate_at(int c, const PropPtr& p) const {
  if (!posed_at(c, p)) return true;
  return !forces(c, p) && !forces(c, neg(p));
}

bool KripkeModel::indeterminate_at(const std::string& c,
                                   const PropPtr& p) const {
  return indeterminate_at(poset_.index_of(c), p);
}

std::vector<MonotoneViolation> KripkeModel::check_monotone() const {
  std::vector<MonotoneViolation> out;
  auto scan = [&](const std::map<std::string, std::vector<bool>>& table) {
    for (const auto& [key, mask] : table)
      for (int c = 0; c < poset_.size(); ++c)
        for (int d = 0; d < poset_.size(); ++d)
          if (c != d && poset_.leq(c, d) && mask[c] && !mask[d])
            out.push_back({key, poset_.at(c).name, poset_.at(d).name});
  };
  scan(atom_forced_);
  scan(posed_);
  return out;
}

}  // namespace causord::forcing
