#pragma once

#include "kisinlab/breuil.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kl {

inline constexpr unsigned kFormatVersion = 1;

// Syntax errors carry the position of the offending token; semantic errors
// carry the line of the record whose invariant failed.
class ParseError : public std::runtime_error {
public:
  enum class Kind { Syntax, Semantic };
  ParseError(Kind kind, std::size_t line, std::size_t column, const std::string &message);
  Kind kind;
  std::size_t line, column;
  std::string message;
};

struct NamedKisin {
  std::string name;
  KisinModule module;
  bool operator==(const NamedKisin &) const = default;
};

struct NamedMorphism {
  std::string name, source, target;
  KisinMorphism morphism;
  bool operator==(const NamedMorphism &o) const {
    return name == o.name && source == o.source && target == o.target && morphism.matrix == o.morphism.matrix;
  }
};

struct NamedBreuil {
  std::string name, source;
  unsigned r = 0;
  BreuilModule module;
  bool operator==(const NamedBreuil &o) const {
    return name == o.name && source == o.source && r == o.r && module == o.module;
  }
};

struct NamedSequence {
  std::string name;
  std::vector<std::string> maps;
  bool operator==(const NamedSequence &) const = default;
};

struct ModuleFile {
  unsigned version = kFormatVersion;
  Ctx ctx;
  std::vector<NamedKisin> kisin;
  std::vector<NamedMorphism> morphisms;
  std::vector<NamedBreuil> breuil;
  std::vector<NamedSequence> sequences;

  bool operator==(const ModuleFile &o) const;

  // Throw std::out_of_range naming the missing record.
  [[nodiscard]] const KisinModule &kisin_module(const std::string &name) const;
  [[nodiscard]] const KisinMorphism &morphism(const std::string &name) const;
  [[nodiscard]] const BreuilModule &breuil_module(const std::string &name) const;
  // Morphisms of a named sequence in order; NotComposable if they do not chain.
  [[nodiscard]] std::vector<KisinMorphism> sequence(const std::string &name) const;
};

ModuleFile parse_module_file(std::string_view text);
std::string render_module_file(const ModuleFile &file);
ModuleFile read_module_file(const std::string &path);

// Element syntax shared with render(): terms c*u^n (or c*bn for S), joined by + and -.
SigmaElem parse_sigma(const Ctx &ctx, std::string_view text);
SElem parse_s(const Ctx &ctx, std::string_view text);
std::string render_ctx(const Ctx &ctx);

} // namespace kl
