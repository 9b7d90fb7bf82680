// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pcat {

using ObjId = int;
using MorId = std::int64_t;

class CategoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProductData {
  ObjId obj;
  MorId p1;
  MorId p2;
};

// A finite category with a designated terminal object, designated binary
// products (possibly partial, for bounded word categories) and pairing.
// Morphism ids are dense in [0, morphism_count()).
class Category {
 public:
  virtual ~Category() = default;
  virtual int object_count() const = 0;
  virtual std::string object_name(ObjId a) const = 0;
  virtual MorId morphism_count() const = 0;
  virtual ObjId dom(MorId f) const = 0;
  virtual ObjId cod(MorId f) const = 0;
  virtual std::string morphism_name(MorId f) const = 0;
  virtual MorId identity(ObjId a) const = 0;
  virtual MorId compose(MorId g, MorId f) const = 0;  // g after f
  virtual ObjId terminal() const = 0;
  virtual std::optional<ProductData> product(ObjId b, ObjId c) const = 0;
  virtual MorId pair(MorId f, MorId g) const = 0;
  virtual MorId hom_size(ObjId a, ObjId b) const = 0;
  virtual MorId hom_at(ObjId a, ObjId b, MorId i) const = 0;
  virtual std::optional<ObjId> find_object(const std::string& name) const;
  virtual std::optional<MorId> find_morphism(const std::string& name) const;

  MorId bang(ObjId a) const;
  std::vector<MorId> hom(ObjId a, ObjId b) const;
  ProductData product_or_throw(ObjId b, ObjId c) const;
};

// Left-nested n-ary products: [] is terminal, [a] is a, [a,b,c] is (a*b)*c.
std::optional<ObjId> product_of(const Category& C, const std::vector<ObjId>& factors);
ObjId product_of_or_throw(const Category& C, const std::vector<ObjId>& factors);
MorId projection(const Category& C, const std::vector<ObjId>& factors, size_t i);
MorId tuple(const Category& C, ObjId dom, const std::vector<ObjId>& factors,
            const std::vector<MorId>& comps);
// b*(c*d) -> (b*c)*d
MorId assoc_iso(const Category& C, ObjId b, ObjId c, ObjId d);
std::optional<MorId> find_inverse(const Category& C, MorId m);

// Category given by explicit tables.
class ExplicitCategory : public Category {
 public:
  struct Mor {
    std::string name;
    ObjId dom;
    ObjId cod;
  };
  ExplicitCategory(std::vector<std::string> objects, std::vector<Mor> mors,
                   std::vector<MorId> identities, ObjId terminal);
  void set_comp(MorId g, MorId f, MorId h);
  void set_product(ObjId b, ObjId c, ProductData d);
  void set_pair(MorId f, MorId g, MorId h);
  // throws CategoryError on missing entries for composable pairs / products
  void finish();

  int object_count() const override { return static_cast<int>(objects_.size()); }
  std::string object_name(ObjId a) const override { return objects_.at(a); }
  MorId morphism_count() const override { return static_cast<MorId>(mors_.size()); }
  ObjId dom(MorId f) const override { return mors_.at(f).dom; }
  ObjId cod(MorId f) const override { return mors_.at(f).cod; }
  std::string morphism_name(MorId f) const override { return mors_.at(f).name; }
  MorId identity(ObjId a) const override { return ids_.at(a); }
  MorId compose(MorId g, MorId f) const override;
  ObjId terminal() const override { return terminal_; }
  std::optional<ProductData> product(ObjId b, ObjId c) const override;
  MorId pair(MorId f, MorId g) const override;
  MorId hom_size(ObjId a, ObjId b) const override;
  MorId hom_at(ObjId a, ObjId b, MorId i) const override;

  const std::map<std::pair<ObjId, ObjId>, ProductData>& products() const { return prod_; }
  const std::map<std::pair<MorId, MorId>, MorId>& pairs() const { return pair_; }

 private:
  std::vector<std::string> objects_;
  std::vector<Mor> mors_;
  std::vector<MorId> ids_;
  ObjId terminal_;
  std::vector<MorId> comp_;  // n*n, -1 when absent
  std::map<std::pair<ObjId, ObjId>, ProductData> prod_;
  std::map<std::pair<MorId, MorId>, MorId> pair_;
  std::vector<std::vector<MorId>> homs_;
};

// Objects are words over finite atoms up to a length bound; morphisms are all
// functions between the cartesian products; products are concatenation.
class WordCategory : public Category {
 public:
  struct Atom {
    std::string name;
    std::vector<std::string> elems;
  };
  WordCategory(std::vector<Atom> atoms, int depth);

  int object_count() const override { return static_cast<int>(words_.size()); }
  std::string object_name(ObjId a) const override;
  MorId morphism_count() const override { return total_; }
  ObjId dom(MorId f) const override { return locate(f).first; }
  ObjId cod(MorId f) const override { return locate(f).second; }
  std::string morphism_name(MorId f) const override;
  MorId identity(ObjId a) const override;
  MorId compose(MorId g, MorId f) const override;
  ObjId terminal() const override { return 0; }
  std::optional<ProductData> product(ObjId b, ObjId c) const override;
  MorId pair(MorId f, MorId g) const override;
  MorId hom_size(ObjId a, ObjId b) const override;
  MorId hom_at(ObjId a, ObjId b, MorId i) const override;
  std::optional<ObjId> find_object(const std::string& name) const override;
  std::optional<MorId> find_morphism(const std::string& name) const override;

  const std::vector<Atom>& atoms() const { return atoms_; }
  int depth() const { return depth_; }
  const std::vector<int>& word(ObjId a) const { return words_.at(a); }
  std::optional<ObjId> object_of(const std::vector<int>& w) const;
  int carrier_size(ObjId a) const { return sizes_.at(a); }
  // point index -> element index per letter
  std::vector<int> point(ObjId a, int p) const;
  std::string point_name(ObjId a, int p) const;
  std::vector<int> table(MorId f) const;
  MorId from_table(ObjId a, ObjId b, const std::vector<int>& t) const;

 private:
  std::pair<ObjId, ObjId> locate(MorId f) const;
  std::vector<Atom> atoms_;
  int depth_;
  std::vector<std::vector<int>> words_;
  std::vector<int> sizes_;
  std::map<std::vector<int>, ObjId> index_;
  std::vector<MorId> offset_;  // (a*n+b) -> first id
  std::vector<MorId> count_;   // (a*n+b) -> hom size
  MorId total_ = 0;
  std::vector<std::int32_t> comp_cache_;  // dense when small
};

// Componentwise product of categories; the empty product is the one-object,
// one-morphism category.
class ProductCategory : public Category {
 public:
  explicit ProductCategory(std::vector<std::shared_ptr<const Category>> parts);

  int object_count() const override { return nobj_; }
  std::string object_name(ObjId a) const override;
  MorId morphism_count() const override { return nmor_; }
  ObjId dom(MorId f) const override;
  ObjId cod(MorId f) const override;
  std::string morphism_name(MorId f) const override;
  MorId identity(ObjId a) const override;
  MorId compose(MorId g, MorId f) const override;
  ObjId terminal() const override;
  std::optional<ProductData> product(ObjId b, ObjId c) const override;
  MorId pair(MorId f, MorId g) const override;
  MorId hom_size(ObjId a, ObjId b) const override;
  MorId hom_at(ObjId a, ObjId b, MorId i) const override;

  size_t arity() const { return parts_.size(); }
  const Category& part(size_t i) const { return *parts_[i]; }
  std::shared_ptr<const Category> part_ptr(size_t i) const { return parts_[i]; }
  std::vector<ObjId> split_obj(ObjId a) const;
  ObjId join_obj(const std::vector<ObjId>& xs) const;
  std::vector<MorId> split_mor(MorId f) const;
  MorId join_mor(const std::vector<MorId>& xs) const;

 private:
  std::vector<std::shared_ptr<const Category>> parts_;
  int nobj_ = 1;
  MorId nmor_ = 1;
};

// Subcategory of a parent given by object and morphism lists, with its own
// designated product data. Local ids are dense; parent ids are kept.
class SubCategory : public Category {
 public:
  SubCategory(std::shared_ptr<const Category> parent, std::vector<ObjId> objs, std::vector<MorId> mors,
              ObjId terminal_local);
  void set_product(ObjId b, ObjId c, ProductData local);
  void set_pair(MorId f, MorId g, MorId h);

  int object_count() const override { return static_cast<int>(objs_.size()); }
  std::string object_name(ObjId a) const override { return parent_->object_name(objs_.at(a)); }
  MorId morphism_count() const override { return static_cast<MorId>(mors_.size()); }
  ObjId dom(MorId f) const override;
  ObjId cod(MorId f) const override;
  std::string morphism_name(MorId f) const override { return parent_->morphism_name(mors_.at(f)); }
  MorId identity(ObjId a) const override;
  MorId compose(MorId g, MorId f) const override;
  ObjId terminal() const override { return terminal_; }
  std::optional<ProductData> product(ObjId b, ObjId c) const override;
  MorId pair(MorId f, MorId g) const override;
  MorId hom_size(ObjId a, ObjId b) const override;
  MorId hom_at(ObjId a, ObjId b, MorId i) const override;

  const Category& parent() const { return *parent_; }
  ObjId parent_obj(ObjId a) const { return objs_.at(a); }
  MorId parent_mor(MorId f) const { return mors_.at(f); }
  std::optional<ObjId> local_obj(ObjId p) const;
  std::optional<MorId> local_mor(MorId p) const;

 private:
  std::shared_ptr<const Category> parent_;
  std::vector<ObjId> objs_;
  std::vector<MorId> mors_;
  ObjId terminal_;
  std::unordered_map<ObjId, ObjId> obj_index_;
  std::unordered_map<MorId, MorId> mor_index_;
  std::map<std::pair<ObjId, ObjId>, ProductData> prod_;
  std::map<std::pair<MorId, MorId>, MorId> pair_;
  std::vector<std::vector<MorId>> homs_;
};

}  // namespace pcat
