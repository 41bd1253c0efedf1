#include "texpand/microcode.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace texpand::micro {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

// Splits on `sep` at nesting depth zero.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == sep && depth == 0) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(s.substr(start)));
  return parts;
}

struct PendingBranch {
  std::size_t line_index;
  std::size_t op_index;
  std::string label;
  int source_line;
};

class RoutineParser {
 public:
  RoutineParser(std::string name, const RegisterFile& regs) : regs_(regs) {
    routine_.name = std::move(name);
  }

  void add_line(std::string_view raw, int source_line) {
    line_ = source_line;
    std::string_view text = raw;
    if (auto c = text.find("//"); c != std::string_view::npos) text = text.substr(0, c);
    text = trim(text);
    if (text.empty()) return;

    // Leading `label:`.
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
      std::string_view head = trim(text.substr(0, colon));
      if (is_identifier(head)) {
        const std::string key = lower(head);
        if (labels_.count(key)) fail("duplicate micro label '" + std::string(head) + "'");
        labels_[key] = static_cast<int>(routine_.lines.size());
        text = trim(text.substr(colon + 1));
        if (text.empty()) return;
      }
    }

    MicroInstruction mi;
    mi.source_line = source_line;
    for (std::string_view stmt : split_top(text, ';')) {
      if (stmt.empty()) continue;
      parse_statement(stmt, mi);
    }
    if (mi.ops.empty()) return;
    for (std::size_t i = 0; i + 1 < mi.ops.size(); ++i) {
      if (is_control(mi.ops[i])) fail("control micro-op must be last on its line");
    }
    routine_.lines.push_back(std::move(mi));
  }

  MicroRoutine finish() {
    for (const PendingBranch& b : pending_) {
      auto it = labels_.find(b.label);
      if (it == labels_.end()) {
        throw MicrocodeError(b.source_line, "unknown micro label '" + b.label + "' in routine " +
                                                routine_.name);
      }
      if (it->second >= static_cast<int>(routine_.lines.size())) {
        throw MicrocodeError(b.source_line, "micro label '" + b.label + "' labels no line");
      }
      MicroOp& op = routine_.lines[b.line_index].ops[b.op_index];
      if (auto* br = std::get_if<CondMicroBranch>(&op)) br->target = it->second;
      if (auto* j = std::get_if<MicroJump>(&op)) j->target = it->second;
    }
    if (routine_.lines.empty()) throw MicrocodeError(line_, "routine " + routine_.name + " is empty");
    try {
      routine_.validate();
    } catch (const std::invalid_argument& e) {
      throw MicrocodeError(line_, e.what());
    }
    return std::move(routine_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw MicrocodeError(line_, what); }

  int reg_index(std::string_view name) const {
    auto r = regs_.find(trim(name));
    if (!r) fail("unknown register '" + std::string(trim(name)) + "'");
    return *r;
  }

  IrField parse_field(std::string_view s, bool is_signed) const {
    // s looks like "ir(a-b)"
    s = trim(s);
    if (!starts_with_ci(s, "ir(") || s.back() != ')') fail("bad ir field '" + std::string(s) + "'");
    std::string_view inner = s.substr(3, s.size() - 4);
    auto dash = inner.find('-');
    if (dash == std::string_view::npos) fail("bad ir field '" + std::string(s) + "'");
    int a = 0, b = 0;
    try {
      a = std::stoi(std::string(trim(inner.substr(0, dash))));
      b = std::stoi(std::string(trim(inner.substr(dash + 1))));
    } catch (const std::exception&) {
      fail("bad ir field bounds '" + std::string(s) + "'");
    }
    IrField f{std::max(a, b), std::min(a, b), is_signed};
    if (f.lo < 0 || f.hi > 31) fail("ir field out of range '" + std::string(s) + "'");
    return f;
  }

  Operand parse_operand(std::string_view s) const {
    s = trim(s);
    if (s.empty()) fail("missing operand");
    if (s.front() == '#') {
      try {
        const long long v = std::stoll(std::string(s.substr(1)), nullptr, 0);
        return Operand::Literal(static_cast<std::uint32_t>(v));
      } catch (const std::exception&) {
        fail("bad literal '" + std::string(s) + "'");
      }
    }
    if (starts_with_ci(s, "sext(") && s.back() == ')') {
      return Operand::Field(parse_field(s.substr(5, s.size() - 6), true));
    }
    if (starts_with_ci(s, "ir(")) return Operand::Field(parse_field(s, false));
    if (regs_.gpr_count() > 0 && starts_with_ci(s, "r[") && s.back() == ']') {
      return Operand::GprField(parse_field(s.substr(2, s.size() - 3), false));
    }
    if (auto r = regs_.find(s)) return Operand::Register(*r);
    if (regs_.gpr_count() > 0 && s.size() >= 2 && (s[0] == 'R' || s[0] == 'r') &&
        std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int n = std::stoi(std::string(s.substr(1)));
      if (n >= regs_.gpr_count()) fail("no general register " + std::string(s));
      return Operand::Gpr(n);
    }
    fail("unknown operand '" + std::string(s) + "'");
  }

  Operand parse_dest(std::string_view s) const {
    Operand d = parse_operand(s);
    if (!d.writable()) fail("'" + std::string(trim(s)) + "' is not writable");
    return d;
  }

  // Appends the micro-ops computing `expr` into `dst`.
  void emit_expr(std::string_view expr, const Operand& dst, MicroInstruction& mi) const {
    expr = trim(expr);
    for (auto [fn, op] : {std::pair{"min(", AluOp::kMin}, std::pair{"cmp(", AluOp::kCmp}}) {
      if (starts_with_ci(expr, fn) && expr.back() == ')') {
        auto args = split_top(expr.substr(4, expr.size() - 5), ',');
        if (args.size() != 2) fail("expected two arguments in '" + std::string(expr) + "'");
        mi.ops.push_back(Alu{op, parse_operand(args[0]), parse_operand(args[1]), dst});
        return;
      }
    }
    int depth = 0;
    for (std::size_t i = 0; i < expr.size(); ++i) {
      const char c = expr[i];
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (depth != 0 || i == 0 || expr[i - 1] == '#') continue;
      std::optional<AluOp> op;
      std::size_t width = 1;
      switch (c) {
        case '+': op = AluOp::kAdd; break;
        case '-': op = AluOp::kSub; break;
        case '&': op = AluOp::kAnd; break;
        case '|': op = AluOp::kOr; break;
        case '^': op = AluOp::kXor; break;
        case '<':
          if (i + 1 < expr.size() && expr[i + 1] == '<') op = AluOp::kShl, width = 2;
          break;
        case '>':
          if (i + 1 < expr.size() && expr[i + 1] == '>') op = AluOp::kShr, width = 2;
          break;
        default: break;
      }
      if (!op) continue;
      mi.ops.push_back(Alu{*op, parse_operand(expr.substr(0, i)),
                           parse_operand(expr.substr(i + width)), dst});
      return;
    }
    const Operand src = parse_operand(expr);
    if (src.kind == Operand::Kind::kIrField) {
      mi.ops.push_back(BitfieldToReg{src.field, dst});
    } else {
      mi.ops.push_back(RegTransfer{src, dst});
    }
  }

  std::optional<int> memory_address(std::string_view s) const {
    s = trim(s);
    if (!starts_with_ci(s, "main") ) return std::nullopt;
    std::string_view rest = trim(s.substr(4));
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') return std::nullopt;
    return reg_index(rest.substr(1, rest.size() - 2));
  }

  void add_branch(MicroInstruction& mi, MicroOp op, std::string_view label) {
    label = trim(label);
    if (!is_identifier(label)) fail("bad micro label '" + std::string(label) + "'");
    pending_.push_back({routine_.lines.size(), mi.ops.size(), lower(label), line_});
    mi.ops.push_back(std::move(op));
  }

  void parse_statement(std::string_view stmt, MicroInstruction& mi) {
    const std::string low = lower(stmt);
    if (low == "end") return mi.ops.push_back(End{});
    if (low == "halt") return mi.ops.push_back(Halt{});
    if (low == "rd") return mi.ops.push_back(MemRead{reg_index("mar"), reg_index("mdr")});
    if (low == "wr") return mi.ops.push_back(MemWrite{reg_index("mar"), reg_index("mdr")});
    if (low == "fault" || starts_with_ci(stmt, "fault ")) {
      return mi.ops.push_back(Fault{std::string(trim(stmt.substr(5)))});
    }
    if (starts_with_ci(stmt, "goto ")) return add_branch(mi, MicroJump{}, stmt.substr(5));
    if (starts_with_ci(stmt, "if ")) {
      std::string_view rest = trim(stmt.substr(3));
      auto g = lower(rest).find(" goto ");
      if (g == std::string::npos) fail("conditional micro-branch needs 'goto'");
      std::string_view test = trim(rest.substr(0, g));
      std::string_view label = rest.substr(g + 6);
      auto paren = test.find('(');
      if (paren == std::string_view::npos || test.back() != ')') fail("bad condition '" + std::string(test) + "'");
      const std::string cname = lower(trim(test.substr(0, paren)));
      Condition cond;
      if (cname == "zero") cond = Condition::kZero;
      else if (cname == "nonzero") cond = Condition::kNonzero;
      else if (cname == "neg") cond = Condition::kNeg;
      else if (cname == "ge") cond = Condition::kGe;
      else fail("unknown condition '" + cname + "'");
      Operand subject = parse_operand(test.substr(paren + 1, test.size() - paren - 2));
      return add_branch(mi, CondMicroBranch{cond, subject, 0}, label);
    }
    if (auto arrow = stmt.find("->"); arrow != std::string_view::npos) {
      std::string_view lhs = stmt.substr(0, arrow);
      std::string_view rhs = stmt.substr(arrow + 2);
      if (auto addr = memory_address(lhs)) {
        return mi.ops.push_back(MemRead{*addr, reg_index(rhs)});
      }
      if (auto addr = memory_address(rhs)) {
        return mi.ops.push_back(MemWrite{*addr, reg_index(lhs)});
      }
      return emit_expr(lhs, parse_dest(rhs), mi);
    }
    if (auto arrow = stmt.find("<-"); arrow != std::string_view::npos) {
      return emit_expr(stmt.substr(arrow + 2), parse_dest(stmt.substr(0, arrow)), mi);
    }
    auto parts = split_top(stmt, '=');
    if (parts.size() >= 2) {
      // d1 = d2 = ... = expr: compute into the last destination, then copy.
      const Operand last = parse_dest(parts[parts.size() - 2]);
      emit_expr(parts.back(), last, mi);
      for (std::size_t i = 0; i + 2 < parts.size(); ++i) {
        mi.ops.push_back(RegTransfer{last, parse_dest(parts[i])});
      }
      return;
    }
    fail("cannot parse micro-op '" + std::string(stmt) + "'");
  }

  const RegisterFile& regs_;
  MicroRoutine routine_;
  std::map<std::string, int> labels_;
  std::vector<PendingBranch> pending_;
  int line_ = 0;
};

}  // namespace

RegisterFile::RegisterFile(std::vector<std::string> names, int gpr_count)
    : gpr_count_(gpr_count) {
  for (auto& n : names) names_.push_back(lower(n));
}

std::optional<int> RegisterFile::find(std::string_view name) const {
  const std::string key = lower(trim(name));
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == key) return i;
  }
  return std::nullopt;
}

int RegisterFile::index(std::string_view name) const {
  auto r = find(name);
  if (!r) throw std::out_of_range("unknown register '" + std::string(name) + "'");
  return *r;
}

std::uint32_t IrField::extract(std::uint32_t ir) const {
  const int width = hi - lo + 1;
  const std::uint32_t mask = width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
  std::uint32_t v = (ir >> lo) & mask;
  if (is_signed && width < 32 && ((v >> (width - 1)) & 1u)) v |= ~mask;
  return v;
}

std::uint32_t alu(AluOp op, std::uint32_t a, std::uint32_t b) {
  switch (op) {
    case AluOp::kAdd: return a + b;
    case AluOp::kSub: return a - b;
    case AluOp::kAnd: return a & b;
    case AluOp::kOr: return a | b;
    case AluOp::kXor: return a ^ b;
    case AluOp::kShl: return a << (b & 31u);
    case AluOp::kShr: return a >> (b & 31u);
    case AluOp::kMin:
      return static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b) ? a : b;
    case AluOp::kCmp:
      return static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b) ? 1u : 0u;
  }
  return 0;
}

bool is_control(const MicroOp& op) {
  return std::holds_alternative<CondMicroBranch>(op) || std::holds_alternative<MicroJump>(op) ||
         std::holds_alternative<End>(op) || std::holds_alternative<Halt>(op) ||
         std::holds_alternative<Fault>(op);
}

void MicroRoutine::validate() const {
  if (lines.empty()) throw std::invalid_argument("routine " + name + " has no lines");
  const int n = static_cast<int>(lines.size());
  for (const MicroInstruction& mi : lines) {
    if (mi.ops.empty()) throw std::invalid_argument("routine " + name + " has an empty line");
    for (std::size_t i = 0; i < mi.ops.size(); ++i) {
      const MicroOp& op = mi.ops[i];
      if (is_control(op) && i + 1 != mi.ops.size()) {
        throw std::invalid_argument("routine " + name + ": control op not last on its line");
      }
      int target = -1;
      if (auto* br = std::get_if<CondMicroBranch>(&op)) target = br->target;
      if (auto* j = std::get_if<MicroJump>(&op)) target = j->target;
      if (target != -1 && (target < 0 || target >= n)) {
        throw std::invalid_argument("routine " + name + ": branch target outside routine");
      }
    }
  }
  const MicroOp& last = lines.back().ops.back();
  const bool terminal = std::holds_alternative<End>(last) || std::holds_alternative<Halt>(last) ||
                        std::holds_alternative<Fault>(last) ||
                        std::holds_alternative<MicroJump>(last);
  if (!terminal) throw std::invalid_argument("routine " + name + " can run past its last line");
}

MicrocodeError::MicrocodeError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<MicroRoutine> parse_control_store(std::string_view text, const RegisterFile& regs) {
  std::vector<MicroRoutine> routines;
  std::optional<RoutineParser> current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    std::string_view t = trim(line);
    if (auto c = t.find("//"); c != std::string_view::npos) t = trim(t.substr(0, c));
    if (starts_with_ci(t, "routine ")) {
      if (current) routines.push_back(current->finish());
      std::string_view name = trim(t.substr(8));
      if (name.empty() || name.back() != ':') throw MicrocodeError(line_no, "routine header needs ':'");
      name = trim(name.substr(0, name.size() - 1));
      if (name.empty()) throw MicrocodeError(line_no, "routine header without a name");
      for (const auto& r : routines) {
        if (lower(r.name) == lower(name)) {
          throw MicrocodeError(line_no, "duplicate routine '" + std::string(name) + "'");
        }
      }
      current.emplace(std::string(name), regs);
      continue;
    }
    if (!current) {
      if (!t.empty()) throw MicrocodeError(line_no, "micro-op outside a routine");
      continue;
    }
    current->add_line(line, line_no);
  }
  if (current) routines.push_back(current->finish());
  return routines;
}

MicroRoutine parse_routine(std::string_view name, std::string_view body, const RegisterFile& regs) {
  RoutineParser p{std::string(name), regs};
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t eol = body.find('\n', pos);
    if (eol == std::string_view::npos) eol = body.size();
    p.add_line(body.substr(pos, eol - pos), ++line_no);
    pos = eol + 1;
  }
  return p.finish();
}

}  // namespace texpand::micro
