//! The 60-object ground-truth catalog, one strict order per attribute.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Volume,
    Length,
    Weight,
    Density,
    Hardness,
}

impl Attribute {
    pub const ALL: [Attribute; 5] = [
        Attribute::Volume,
        Attribute::Length,
        Attribute::Weight,
        Attribute::Density,
        Attribute::Hardness,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Volume => "volume",
            Attribute::Length => "length",
            Attribute::Weight => "weight",
            Attribute::Density => "density",
            Attribute::Hardness => "hardness",
        }
    }

    /// Single-letter column code used in failure tables.
    pub fn code(self) -> char {
        match self {
            Attribute::Volume => 'V',
            Attribute::Length => 'L',
            Attribute::Weight => 'W',
            Attribute::Density => 'D',
            Attribute::Hardness => 'H',
        }
    }

    /// Comparative for (greater, less).
    pub fn comparatives(self) -> (&'static str, &'static str) {
        match self {
            Attribute::Volume => ("bigger", "smaller"),
            Attribute::Length => ("longer", "shorter"),
            Attribute::Weight => ("heavier", "lighter"),
            Attribute::Density => ("denser", "less dense"),
            Attribute::Hardness => ("harder", "softer"),
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Index into the catalog's flat object list.
pub type ObjectId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogObject {
    pub name: &'static str,
    /// Noun phrase used inside rendered queries, e.g. "an elephant".
    pub phrase: &'static str,
    pub attribute: Attribute,
    /// 0 = smallest within the attribute's column.
    pub rank: usize,
}

// (name, phrase) per column, smallest first.
const VOLUME: [(&str, &str); 15] = [
    ("Coffee bean", "a coffee bean"),
    ("Dice", "a die"),
    ("Golf ball", "a golf ball"),
    ("Soda can", "a soda can"),
    ("Soccer ball", "a soccer ball"),
    ("Microwave oven", "a microwave oven"),
    ("Washing machine", "a washing machine"),
    ("Bathtub", "a bathtub"),
    ("Car", "a car"),
    ("School bus", "a school bus"),
    ("Shipping container", "a shipping container"),
    ("Olympic swimming pool", "an Olympic swimming pool"),
    ("Boeing 747", "a Boeing 747"),
    ("Titanic", "the Titanic"),
    ("Great Pyramid of Giza", "the Great Pyramid of Giza"),
];

const LENGTH: [(&str, &str); 15] = [
    ("Rice", "a grain of rice"),
    ("Paperclip", "a paperclip"),
    ("Credit card", "a credit card"),
    ("Pencil", "a pencil"),
    ("Laptop", "a laptop"),
    ("Baseball bat", "a baseball bat"),
    ("Guitar", "a guitar"),
    ("Door", "a door"),
    ("Apple tree", "an apple tree"),
    ("Coconut tree", "a coconut tree"),
    ("Tennis court", "a tennis court"),
    ("Swimming pool", "a swimming pool"),
    ("Football field", "a football field"),
    ("Skyscraper", "a skyscraper"),
    ("Mount Everest", "Mount Everest"),
];

const WEIGHT: [(&str, &str); 15] = [
    ("Coin", "a coin"),
    ("Spoon", "a spoon"),
    ("Watch", "a watch"),
    ("Smartphone", "a smartphone"),
    ("Bottle of water", "a bottle of water"),
    ("Dictionary", "a dictionary"),
    ("Cat", "a cat"),
    ("Bicycle", "a bicycle"),
    ("Television", "a television"),
    ("Refrigerator", "a refrigerator"),
    ("Tiger", "a tiger"),
    ("Cow", "a cow"),
    ("Rhino", "a rhino"),
    ("Elephant", "an elephant"),
    ("Train", "a train"),
];

const DENSITY: [(&str, &str); 10] = [
    ("Air", "air"),
    ("Wood", "wood"),
    ("Ice", "ice"),
    ("Water", "water"),
    ("Plastic", "plastic"),
    ("Glass", "glass"),
    ("Iron", "iron"),
    ("Copper", "copper"),
    ("Silver", "silver"),
    ("Gold", "gold"),
];

const HARDNESS: [(&str, &str); 5] = [
    ("Marshmallow", "a marshmallow"),
    ("Rubber eraser", "a rubber eraser"),
    ("Brick", "a brick"),
    ("Hammer", "a hammer"),
    ("Diamond ring", "a diamond ring"),
];

#[derive(Debug, Clone)]
pub struct ObjectCatalog {
    objects: Vec<CatalogObject>,
    /// Object ids per attribute, smallest first.
    columns: [Vec<ObjectId>; 5],
    by_name: HashMap<&'static str, ObjectId>,
    by_phrase: HashMap<&'static str, ObjectId>,
}

impl ObjectCatalog {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[CatalogObject] {
        &self.objects
    }

    pub fn object(&self, id: ObjectId) -> &CatalogObject {
        &self.objects[id]
    }

    pub fn column(&self, attribute: Attribute) -> &[ObjectId] {
        &self.columns[attribute.index()]
    }

    pub fn column_names(&self, attribute: Attribute) -> Vec<&'static str> {
        self.column(attribute)
            .iter()
            .map(|&id| self.objects[id].name)
            .collect()
    }

    pub fn id_of(&self, name: &str) -> Result<ObjectId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::domain(format!("unknown object `{name}`")))
    }

    pub fn id_of_phrase(&self, phrase: &str) -> Option<ObjectId> {
        self.by_phrase.get(phrase).copied()
    }

    /// Rank of `id` on `attribute`, or `None` when the object is unranked there.
    pub fn rank_on(&self, id: ObjectId, attribute: Attribute) -> Option<usize> {
        let obj = &self.objects[id];
        (obj.attribute == attribute).then_some(obj.rank)
    }

    /// Catalog as CSV rows `attribute,rank,object` (rank is 1-based).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,rank,object\n");
        for attr in Attribute::ALL {
            for (rank, &id) in self.column(attr).iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", attr, rank + 1, self.objects[id].name));
            }
        }
        out
    }

    /// Ground-truth rankings as prose, for the hint ablation's system message.
    pub fn rankings_text(&self) -> String {
        let mut out = String::from(
            "Ground-truth rankings of the objects for each attribute, from smallest to largest:\n",
        );
        for attr in Attribute::ALL {
            let names = self.column_names(attr).join(" < ");
            let mut label = attr.name().to_string();
            label[..1].make_ascii_uppercase();
            out.push_str(&format!("{label}: {names}\n"));
        }
        out.pop();
        out
    }

    fn validate(&self) -> Result<()> {
        let sizes: Vec<usize> = self.columns.iter().map(Vec::len).collect();
        if sizes != [15, 15, 15, 10, 5] {
            return Err(Error::domain(format!("unexpected column sizes {sizes:?}")));
        }
        if self.by_name.len() != self.objects.len() || self.by_phrase.len() != self.objects.len() {
            return Err(Error::domain("duplicate object name or phrase in catalog"));
        }
        Ok(())
    }
}

/// The compiled-in catalog, validated on construction.
pub fn load_catalog() -> ObjectCatalog {
    let raw: [(Attribute, &[(&'static str, &'static str)]); 5] = [
        (Attribute::Volume, &VOLUME),
        (Attribute::Length, &LENGTH),
        (Attribute::Weight, &WEIGHT),
        (Attribute::Density, &DENSITY),
        (Attribute::Hardness, &HARDNESS),
    ];
    let mut objects = Vec::with_capacity(60);
    let mut columns: [Vec<ObjectId>; 5] = Default::default();
    let mut by_name = HashMap::new();
    let mut by_phrase = HashMap::new();
    for (attribute, entries) in raw {
        for (rank, &(name, phrase)) in entries.iter().enumerate() {
            let id = objects.len();
            objects.push(CatalogObject {
                name,
                phrase,
                attribute,
                rank,
            });
            columns[attribute.index()].push(id);
            by_name.insert(name, id);
            by_phrase.insert(phrase, id);
        }
    }
    let catalog = ObjectCatalog {
        objects,
        columns,
        by_name,
        by_phrase,
    };
    catalog.validate().expect("compiled-in catalog is valid");
    catalog
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let c = load_catalog();
        assert_eq!(c.len(), 60);
        assert_eq!(&c.column_names(Attribute::Weight)[..3], ["Coin", "Spoon", "Watch"]);
        assert_eq!(c.column(Attribute::Hardness).len(), 5);
        assert_eq!(c.column_names(Attribute::Hardness)[0], "Marshmallow");
        assert_eq!(c.column_names(Attribute::Hardness)[4], "Diamond ring");
    }

    #[test]
    fn ranks_are_column_local() {
        let c = load_catalog();
        let train = c.id_of("Train").unwrap();
        assert_eq!(c.rank_on(train, Attribute::Weight), Some(14));
        assert_eq!(c.rank_on(train, Attribute::Volume), None);
        assert!(c.id_of("Unicorn").is_err());
    }

    #[test]
    fn csv_export_has_header_and_sixty_rows() {
        let csv = load_catalog().to_csv();
        assert_eq!(csv.lines().count(), 61);
        assert!(csv.contains("weight,14,Elephant\n"));
    }

    #[test]
    fn rankings_text_lists_every_column() {
        let text = load_catalog().rankings_text();
        assert!(text.contains("Weight: Coin < Spoon < Watch"));
        assert!(text.contains("Hardness: Marshmallow < Rubber eraser < Brick < Hammer < Diamond ring"));
    }
}
