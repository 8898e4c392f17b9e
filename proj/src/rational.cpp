#include "causord/rational.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "causord/errors.hpp"

namespace causord {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  // Trim surrounding whitespace.
  size_t b = text.find_first_not_of(" \t\r\n");
  size_t e = text.find_last_not_of(" \t\r\n");
  if (b == std::string::npos)
    throw ParseError("empty number");
  std::string s = text.substr(b, e - b + 1);

  std::string sign;
  if (s[0] == '+' || s[0] == '-') {
    if (s[0] == '-') sign = "-";
    s = s.substr(1);
  }
  if (s.empty()) throw ParseError("malformed number '" + text + "'");

  auto slash = s.find('/');
  auto dot = s.find('.');
  try {
    if (slash != std::string::npos) {
      std::string num = s.substr(0, slash);
      std::string den = s.substr(slash + 1);
      if (!all_digits(num) || !all_digits(den))
        throw ParseError("malformed fraction '" + text + "'");
      Rational q(sign + num + "/" + den, 10);
      if (q.get_den() == 0)
        throw ParseError("zero denominator in '" + text + "'");
      q.canonicalize();
      return q;
    }
    if (dot != std::string::npos) {
      std::string ip = s.substr(0, dot);
      std::string fp = s.substr(dot + 1);
      if (ip.empty()) ip = "0";
      if (fp.empty()) fp = "0";
      if (!all_digits(ip) || !all_digits(fp))
        throw ParseError("malformed decimal '" + text + "'");
      std::string den = "1" + std::string(fp.size(), '0');
      Rational q(sign + ip + fp + "/" + den, 10);
      q.canonicalize();
      return q;
    }
    if (!all_digits(s))
      throw ParseError("malformed number '" + text + "'");
    return Rational(sign + s, 10);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed number '" + text + "'");
  }
}

std::string rational_str(const Rational& q) { return q.get_str(); }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Avoid the "-0.000000" artifact so equal values print identically.
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string rational_with_float(const Rational& q) {
  return rational_str(q) + " (" + fixed6(q.get_d()) + ")";
}

std::vector<Rational> integer_normalize(const std::vector<Rational>& in,
                                        Rational& scale) {
  scale = 1;
  if (in.empty()) return {};
  mpz_class l = 1;
  bool any = false;
  for (const auto& q : in) {
    if (q != 0) {
      l = lcm(l, q.get_den());
      any = true;
    }
  }
  if (!any) return std::vector<Rational>(in.size(), Rational(0));
  mpz_class g = 0;
  std::vector<Rational> out(in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    mpz_class z = in[i].get_num() * (l / in[i].get_den());
    out[i] = Rational(z);
    g = gcd(g, z);
  }
  if (g > 1) {
    for (auto& q : out) q /= Rational(g);
  }
  scale = Rational(l) / Rational(g > 1 ? g : mpz_class(1));
  return out;
}

}  // namespace causord
