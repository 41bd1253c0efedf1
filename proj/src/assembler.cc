#include "texpand/assembler.h"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>

namespace texpand::assembler {

namespace {

using micro::OperandFormat;

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

bool is_symbol(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s.front())) && s.front() != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::string hex(std::uint32_t v) {
  std::ostringstream o;
  o << "0x" << std::hex << v;
  return o.str();
}

enum class Section { kText, kData };

struct Statement {
  int line = 0;
  Section section = Section::kText;
  std::uint32_t addr = 0;
  std::string op;  // lower-case mnemonic or directive
  std::string operands;
};

class Assembler {
 public:
  explicit Assembler(const isa::Profile& profile) : profile_(profile) {}

  Image run(std::string_view source) {
    first_pass(source);
    Image img;
    img.profile = profile_.id;
    img.entry = text_base_;
    img.symbols = symbols_;
    for (const Statement& st : statements_) {
      line_ = st.line;
      if (st.op == ".word") {
        std::uint32_t addr = st.addr;
        for (auto v : split_operands(st.operands)) {
          img.data.push_back({addr++, static_cast<std::uint32_t>(value(v))});
        }
      } else {
        img.code.push_back(encode(st));
      }
    }
    const std::uint32_t code_end = img.entry + static_cast<std::uint32_t>(img.code.size());
    std::set<std::uint32_t> seen;
    for (const DataWord& d : img.data) {
      if (d.addr >= img.entry && d.addr < code_end) {
        throw AssemblyError(0, "data word at " + hex(d.addr) + " overlaps code");
      }
      if (!seen.insert(d.addr).second) {
        throw AssemblyError(0, "data word at " + hex(d.addr) + " defined twice");
      }
    }
    return img;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw AssemblyError(line_, what); }

  void define(std::string_view name, std::uint32_t v) {
    if (!is_symbol(name)) fail("bad symbol name '" + std::string(name) + "'");
    if (!symbols_.emplace(std::string(name), v).second) {
      fail("duplicate symbol '" + std::string(name) + "'");
    }
  }

  void first_pass(std::string_view source) {
    Section section = Section::kText;
    std::uint32_t text_pc = 0;
    std::optional<std::uint32_t> data_pc;
    bool have_code = false;
    std::size_t pos = 0;
    line_ = 0;
    while (pos <= source.size()) {
      std::size_t eol = source.find('\n', pos);
      if (eol == std::string_view::npos) eol = source.size();
      std::string_view text = source.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_;
      if (auto c = text.find(';'); c != std::string_view::npos) text = text.substr(0, c);
      text = trim(text);
      while (true) {
        auto colon = text.find(':');
        if (colon == std::string_view::npos) break;
        std::string_view head = trim(text.substr(0, colon));
        if (!is_symbol(head)) break;
        if (section == Section::kData && !data_pc) {
          floating_labels_.emplace_back(std::string(head), floating_words_);
        } else {
          define(head, section == Section::kText ? text_pc : *data_pc);
        }
        text = trim(text.substr(colon + 1));
      }
      if (text.empty()) continue;

      std::size_t sp = 0;
      while (sp < text.size() && !std::isspace(static_cast<unsigned char>(text[sp]))) ++sp;
      const std::string op = lower(text.substr(0, sp));
      const std::string_view rest = trim(text.substr(sp));

      if (op == ".text") {
        section = Section::kText;
      } else if (op == ".data") {
        section = Section::kData;
      } else if (op == ".equ") {
        auto parts = split_operands(rest);
        if (parts.size() != 2) fail(".equ needs a name and a value");
        define(parts[0], static_cast<std::uint32_t>(value(parts[1])));
      } else if (op == ".org") {
        const auto addr = static_cast<std::uint32_t>(value(rest));
        if (section == Section::kText) {
          if (have_code) fail(".org in .text after the first instruction");
          text_pc = text_base_ = addr;
        } else {
          data_pc = addr;
        }
      } else if (op == ".word") {
        if (section != Section::kData) fail(".word outside .data");
        const auto n = static_cast<std::uint32_t>(split_operands(rest).size());
        if (n == 0) fail(".word needs at least one value");
        if (data_pc) {
          statements_.push_back({line_, section, *data_pc, op, std::string(rest)});
          *data_pc += n;
        } else {
          floating_.push_back(statements_.size());
          statements_.push_back({line_, section, floating_words_, op, std::string(rest)});
          floating_words_ += n;
        }
      } else if (!op.empty() && op.front() == '.') {
        fail("unknown directive '" + op + "'");
      } else {
        if (section != Section::kText) fail("instruction in .data");
        if (profile_.store.find(op) == nullptr) fail("unknown mnemonic '" + op + "'");
        statements_.push_back({line_, section, text_pc, op, std::string(rest)});
        ++text_pc;
        have_code = true;
      }
    }
    // Data placed before any .org in .data follows the code.
    for (std::size_t i : floating_) statements_[i].addr += text_pc;
    for (auto& [name, offset] : floating_labels_) define(name, text_pc + offset);
  }

  std::int64_t value(std::string_view s) const {
    s = trim(s);
    if (s.empty()) fail("missing value");
    std::int64_t total = 0;
    int sign = 1;
    std::size_t i = 0;
    bool expect_term = true;
    while (i < s.size()) {
      const char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (expect_term) {
        if (c == '-' || c == '+') {
          if (c == '-') sign = -sign;
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                                s[j] == '.')) {
          ++j;
        }
        const std::string_view term = s.substr(i, j - i);
        if (term.empty()) fail("bad expression '" + std::string(s) + "'");
        std::int64_t v = 0;
        if (std::isdigit(static_cast<unsigned char>(term.front()))) {
          try {
            std::size_t used = 0;
            v = std::stoll(std::string(term), &used, 0);
            if (used != term.size()) throw std::invalid_argument("trailing");
          } catch (const std::exception&) {
            fail("bad number '" + std::string(term) + "'");
          }
        } else {
          auto it = symbols_.find(std::string(term));
          if (it == symbols_.end()) fail("undefined symbol '" + std::string(term) + "'");
          v = it->second;
        }
        total += sign * v;
        sign = 1;
        expect_term = false;
        i = j;
      } else {
        if (c != '+' && c != '-') fail("bad expression '" + std::string(s) + "'");
        sign = c == '-' ? -1 : 1;
        expect_term = true;
        ++i;
      }
    }
    if (expect_term) fail("bad expression '" + std::string(s) + "'");
    return total;
  }

  std::uint32_t reg(std::string_view s) const {
    s = trim(s);
    if (s.size() >= 2 && (s[0] == 'r' || s[0] == 'R') &&
        std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int n = std::stoi(std::string(s.substr(1)));
      if (n < profile_.regs.gpr_count()) return static_cast<std::uint32_t>(n);
    }
    fail("bad register '" + std::string(s) + "'");
  }

  std::uint32_t signed_field(std::string_view s, int bits) const {
    const std::int64_t v = value(s);
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
    const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
    if (v < lo || v > hi) {
      fail("value " + std::to_string(v) + " does not fit a signed " + std::to_string(bits) +
           "-bit field");
    }
    return static_cast<std::uint32_t>(v) & ((1u << bits) - 1u);
  }

  std::uint32_t unsigned_field(std::string_view s, int bits) const {
    const std::int64_t v = value(s);
    if (v < 0 || v >= (std::int64_t{1} << bits)) {
      fail("value " + std::to_string(v) + " does not fit an unsigned " + std::to_string(bits) +
           "-bit field");
    }
    return static_cast<std::uint32_t>(v);
  }

  std::uint32_t encode(const Statement& st) const {
    const micro::InstructionDef* def = profile_.store.find(st.op);
    auto ops = split_operands(st.operands);
    auto expect = [&](std::size_t n) {
      if (ops.size() != n) {
        fail(def->mnemonic + " takes " + std::to_string(n) + " operand" + (n == 1 ? "" : "s") +
             ", got " + std::to_string(ops.size()));
      }
    };
    std::uint32_t w = def->opcode << micro::kOpcodeShift;
    switch (def->format) {
      case OperandFormat::kNone:
        expect(0);
        break;
      case OperandFormat::kReg3:
        expect(3);
        w |= reg(ops[0]) << 18 | reg(ops[1]) << 13 | reg(ops[2]) << 8;
        break;
      case OperandFormat::kRegRegImm:
        expect(3);
        w |= reg(ops[0]) << 18 | reg(ops[1]) << 13 | signed_field(ops[2], 13);
        break;
      case OperandFormat::kMem: {
        expect(2);
        const std::string_view m = ops[1];
        const auto open = m.rfind('(');
        if (open == std::string_view::npos || m.back() != ')') {
          fail("expected offset(Rn), got '" + std::string(m) + "'");
        }
        const std::string_view offset = trim(m.substr(0, open));
        w |= reg(ops[0]) << 18 | reg(m.substr(open + 1, m.size() - open - 2)) << 13 |
             signed_field(offset.empty() ? "0" : offset, 13);
        break;
      }
      case OperandFormat::kRegTarget:
        expect(2);
        w |= reg(ops[0]) << 18 | unsigned_field(ops[1], 13);
        break;
      case OperandFormat::kReg:
        expect(1);
        w |= reg(ops[0]) << 18;
        break;
      case OperandFormat::kTarget:
      case OperandFormat::kIndex:
        expect(1);
        w |= unsigned_field(ops[0], 23);
        break;
      case OperandFormat::kImm:
        expect(1);
        w |= signed_field(ops[0], 23);
        break;
    }
    return w;
  }

  const isa::Profile& profile_;
  std::vector<Statement> statements_;
  std::map<std::string, std::uint32_t> symbols_;
  std::vector<std::size_t> floating_;
  std::vector<std::pair<std::string, std::uint32_t>> floating_labels_;
  std::uint32_t floating_words_ = 0;
  std::uint32_t text_base_ = 0;
  int line_ = 0;
};

std::int32_t sext(std::uint32_t v, int bits) {
  const std::uint32_t sign = 1u << (bits - 1);
  return static_cast<std::int32_t>((v ^ sign) - sign);
}

}  // namespace

AssemblyError::AssemblyError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

Image assemble(std::string_view source, const isa::Profile& profile) {
  return Assembler(profile).run(source);
}

std::string disassemble_word(std::uint32_t w, const isa::Profile& profile) {
  const micro::InstructionDef* def = profile.store.find(micro::opcode_of(w));
  if (def == nullptr) throw std::runtime_error("unknown opcode in word " + hex(w));
  const auto rd = (w >> 18) & 31u, rs1 = (w >> 13) & 31u, rs2 = (w >> 8) & 31u;
  std::ostringstream o;
  o << def->mnemonic;
  switch (def->format) {
    case OperandFormat::kNone: break;
    case OperandFormat::kReg3: o << " R" << rd << ", R" << rs1 << ", R" << rs2; break;
    case OperandFormat::kRegRegImm:
      o << " R" << rd << ", R" << rs1 << ", " << sext(w & 0x1FFFu, 13);
      break;
    case OperandFormat::kMem: o << " R" << rd << ", " << sext(w & 0x1FFFu, 13) << "(R" << rs1 << ")"; break;
    case OperandFormat::kRegTarget: o << " R" << rd << ", " << (w & 0x1FFFu); break;
    case OperandFormat::kReg: o << " R" << rd; break;
    case OperandFormat::kTarget:
    case OperandFormat::kIndex: o << " " << (w & 0x7FFFFFu); break;
    case OperandFormat::kImm: o << " " << sext(w & 0x7FFFFFu, 23); break;
  }
  return o.str();
}

std::string disassemble(const Image& image, const isa::Profile& profile) {
  std::ostringstream o;
  o << ".text\n";
  if (image.entry != 0) o << ".org " << image.entry << "\n";
  for (std::size_t i = 0; i < image.code.size(); ++i) {
    const auto addr = image.entry + static_cast<std::uint32_t>(i);
    try {
      o << "    " << disassemble_word(image.code[i], profile) << "\n";
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("address " + hex(addr) + ": " + e.what());
    }
  }
  if (!image.data.empty()) {
    o << ".data\n";
    std::optional<std::uint32_t> next;
    for (const DataWord& d : image.data) {
      if (next != d.addr) o << ".org " << d.addr << "\n";
      o << "    .word " << d.word << "\n";
      next = d.addr + 1;
    }
  }
  return o.str();
}

nlohmann::json to_json(const Image& image) {
  nlohmann::json j;
  j["profile"] = isa::to_string(image.profile);
  j["entry"] = image.entry;
  j["code"] = image.code;
  j["data"] = nlohmann::json::array();
  for (const DataWord& d : image.data) j["data"].push_back({{"addr", d.addr}, {"word", d.word}});
  j["symbols"] = image.symbols;
  return j;
}

Image image_from_json(const nlohmann::json& j) {
  Image img;
  img.profile = isa::parse_profile(j.at("profile").get<std::string>());
  img.entry = j.at("entry").get<std::uint32_t>();
  img.code = j.at("code").get<std::vector<std::uint32_t>>();
  for (const auto& d : j.at("data")) {
    img.data.push_back({d.at("addr").get<std::uint32_t>(), d.at("word").get<std::uint32_t>()});
  }
  if (j.contains("symbols")) img.symbols = j.at("symbols").get<std::map<std::string, std::uint32_t>>();
  return img;
}

void load(const Image& image, const isa::Profile& profile, micro::MachineState& state) {
  if (image.profile != profile.id) {
    throw std::invalid_argument(std::string("image built for the ") + isa::to_string(image.profile) +
                                " profile");
  }
  auto& mem = state.memory();
  if (image.entry + image.code.size() > mem.size()) {
    throw std::out_of_range("code does not fit in memory");
  }
  std::copy(image.code.begin(), image.code.end(), mem.begin() + image.entry);
  for (const DataWord& d : image.data) {
    if (d.addr >= mem.size()) throw std::out_of_range("data word at " + hex(d.addr) + " outside memory");
    mem[d.addr] = d.word;
  }
  state.set_reg(profile.store.pc_register(), image.entry);
}

}  // namespace texpand::assembler
