//! XML export of a whole corpus.
//!
//! ```xml
//! <corpus>
//!   <subcorpus path="indirect_written/book/prose">
//!     <meta kind="descriptive" id="descriptive-0001">...</meta>
//!     <document id="folktale01" meta="written-0001">
//!       <meta kind="written" id="written-0001">...</meta>
//!       <s id="folktale01.0001" status="in_progress" text="həm go">
//!         <w tag="PR__PRP" prov="manual">həm</w>
//!         <w>go</w>
//!       </s>
//!     </document>
//!   </subcorpus>
//! </corpus>
//! ```
//!
//! Metadata fields become child elements of `<meta>`. Numbers, lists and
//! nested objects carry a `type` attribute so the record can be read back
//! exactly; list members are `<item>` elements. Output is indented with two
//! spaces, ordered by subcorpus path, document id and sentence order.

use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde_json::{Map, Number, Value};

use crate::corpus::{Corpus, Document, Sentence, SentenceStatus, SubcorpusPath};
use crate::metadata::{validate_catalog, Catalog, MetadataRecord};
use crate::tagset::{Provenance, Tagset};

use super::SerializationError;

/// XML Schema for the export format.
pub const XML_SCHEMA: &str = include_str!("../../data/corpus.xsd");

fn check_char(c: char) -> Result<(), SerializationError> {
    let ok = matches!(c, '\t' | '\n' | '\r')
        || ('\u{20}'..='\u{D7FF}').contains(&c)
        || ('\u{E000}'..='\u{FFFD}').contains(&c)
        || c >= '\u{10000}';
    if ok {
        Ok(())
    } else {
        Err(SerializationError::Unrepresentable(c as u32))
    }
}

fn escape(s: &str, attribute: bool) -> Result<String, SerializationError> {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        check_char(c)?;
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attribute => out.push_str("&quot;"),
            '\t' if attribute => out.push_str("&#9;"),
            '\n' if attribute => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    Ok(out)
}

/// Minimal element tree shared by the writer and the reader.
#[derive(Debug, Clone, Default, PartialEq)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
}

impl Element {
    fn new(name: &str) -> Element {
        Element {
            name: name.to_string(),
            ..Element::default()
        }
    }

    fn attr(mut self, key: &str, value: impl Into<String>) -> Element {
        self.attrs.push((key.to_string(), value.into()));
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn write(&self, out: &mut String, depth: usize) -> Result<(), SerializationError> {
        let indent = "  ".repeat(depth);
        out.push_str(&indent);
        out.push('<');
        out.push_str(&self.name);
        for (k, v) in &self.attrs {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            out.push_str(&escape(v, true)?);
            out.push('"');
        }
        if !self.children.is_empty() {
            out.push_str(">\n");
            for child in &self.children {
                child.write(out, depth + 1)?;
            }
            out.push_str(&indent);
        } else if !self.text.is_empty() {
            out.push('>');
            out.push_str(&escape(&self.text, false)?);
        } else {
            out.push_str("/>\n");
            return Ok(());
        }
        out.push_str("</");
        out.push_str(&self.name);
        out.push_str(">\n");
        Ok(())
    }
}

fn value_element(name: &str, value: &Value) -> Element {
    let mut el = Element::new(name);
    match value {
        Value::Null => {}
        Value::Bool(b) => {
            el = el.attr("type", "bool");
            el.text = b.to_string();
        }
        Value::Number(n) => {
            el = el.attr("type", "number");
            el.text = n.to_string();
        }
        Value::String(s) => el.text = s.clone(),
        Value::Array(items) => {
            el = el.attr("type", "list");
            el.children = items.iter().map(|v| value_element("item", v)).collect();
        }
        Value::Object(map) => {
            el = el.attr("type", "object");
            el.children = map.iter().map(|(k, v)| value_element(k, v)).collect();
        }
    }
    el
}

fn element_value(el: &Element) -> Result<Value, String> {
    match el.get("type") {
        None => Ok(Value::String(el.text.clone())),
        Some("number") => el
            .text
            .parse::<f64>()
            .ok()
            .and_then(|f| {
                if let Ok(i) = el.text.parse::<i64>() {
                    Some(Number::from(i))
                } else {
                    Number::from_f64(f)
                }
            })
            .map(Value::Number)
            .ok_or_else(|| format!("<{}> holds an invalid number", el.name)),
        Some("bool") => el
            .text
            .parse::<bool>()
            .map(Value::Bool)
            .map_err(|_| format!("<{}> holds an invalid boolean", el.name)),
        Some("list") => el
            .children
            .iter()
            .map(element_value)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Array),
        Some("object") => object_value(el).map(Value::Object),
        Some(other) => Err(format!("unknown value type {other:?}")),
    }
}

fn object_value(el: &Element) -> Result<Map<String, Value>, String> {
    el.children
        .iter()
        .map(|c| Ok((c.name.clone(), element_value(c)?)))
        .collect()
}

fn meta_element(record: &MetadataRecord) -> Element {
    let Value::Object(mut fields) = serde_json::to_value(record).expect("records serialize")
    else {
        unreachable!("records serialize to objects")
    };
    fields.remove("kind");
    fields.remove("record_id");
    let mut el = Element::new("meta")
        .attr("kind", record.kind().as_str())
        .attr("id", record.record_id());
    el.children = fields.iter().map(|(k, v)| value_element(k, v)).collect();
    el
}

fn sentence_element(s: &Sentence) -> Element {
    let mut el = Element::new("s")
        .attr("id", s.id.as_str())
        .attr("status", s.status.as_str())
        .attr("text", s.text.as_str());
    el.children = s
        .tokens
        .iter()
        .map(|t| {
            let mut w = Element::new("w");
            if let Some(tag) = &t.tag {
                w = w
                    .attr("tag", tag.convention.as_str())
                    .attr("prov", tag.provenance.as_str());
            }
            w.text = t.surface.clone();
            w
        })
        .collect();
    el
}

/// Serializes the corpus with its catalog. Fails if the catalog has error
/// findings or a tag does not parse against `tagset`.
pub fn export_xml(
    corpus: &Corpus,
    catalog: &Catalog,
    tagset: &Tagset,
) -> Result<String, SerializationError> {
    let report = validate_catalog(corpus, catalog);
    if report.has_errors() {
        return Err(SerializationError::CatalogInvalid(report));
    }

    let mut branches: BTreeMap<String, (SubcorpusPath, Vec<&Document>)> = BTreeMap::new();
    for doc in corpus.documents() {
        branches
            .entry(doc.subcorpus.to_string())
            .or_insert_with(|| (doc.subcorpus, Vec::new()))
            .1
            .push(doc);
    }

    let mut root = Element::new("corpus");
    for (path, (branch, docs)) in branches {
        let mut sub = Element::new("subcorpus").attr("path", path);
        for d in catalog.descriptive_for(branch) {
            sub.children
                .push(meta_element(&MetadataRecord::Descriptive(d.clone())));
        }
        for doc in docs {
            let mut del = Element::new("document").attr("id", doc.doc_id.as_str());
            if let Some(meta) = &doc.metadata_ref {
                del = del.attr("meta", meta.as_str());
                if let Some(record) = catalog.get(meta) {
                    del.children.push(meta_element(record));
                }
            }
            for s in &doc.sentences {
                for (i, t) in s.tokens.iter().enumerate() {
                    if let Some(tag) = &t.tag {
                        if tagset.parse_tag(&tag.convention).is_err() {
                            return Err(SerializationError::UnknownTag {
                                line: i + 1,
                                tag: format!("{} in sentence {}", tag.convention, s.id),
                            });
                        }
                    }
                }
                del.children.push(sentence_element(s));
            }
            sub.children.push(del);
        }
        root.children.push(sub);
    }

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.write(&mut out, 0)?;
    Ok(out)
}

fn xml_err(reader: &Reader<&[u8]>, reason: impl Into<String>) -> SerializationError {
    let pos = reader.buffer_position() as usize;
    let line = reader.get_ref().get(..pos).map_or(0, |b| {
        b.iter().filter(|&&c| c == b'\n').count()
    }) + 1;
    SerializationError::Parse {
        line,
        reason: reason.into(),
    }
}

fn open(reader: &Reader<&[u8]>, start: &BytesStart) -> Result<Element, SerializationError> {
    let name = String::from_utf8(start.name().as_ref().to_vec())
        .map_err(|_| xml_err(reader, "element name is not UTF-8"))?;
    let mut el = Element::new(&name);
    for attr in start.attributes() {
        let attr = attr.map_err(|e| xml_err(reader, e.to_string()))?;
        let key = String::from_utf8(attr.key.as_ref().to_vec())
            .map_err(|_| xml_err(reader, "attribute name is not UTF-8"))?;
        let value = attr
            .unescape_value()
            .map_err(|e| xml_err(reader, e.to_string()))?;
        el.attrs.push((key, value.into_owned()));
    }
    Ok(el)
}

fn parse_tree(text: &str) -> Result<Element, SerializationError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root = None;
    loop {
        let event = reader
            .read_event()
            .map_err(|e| xml_err(&reader, e.to_string()))?;
        match event {
            Event::Start(start) => {
                let el = open(&reader, &start)?;
                stack.push(el);
            }
            Event::Empty(start) => {
                let el = open(&reader, &start)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                let mut el = stack.pop().ok_or_else(|| xml_err(&reader, "unbalanced end tag"))?;
                if !el.children.is_empty() {
                    // Indentation between child elements.
                    el.text.clear();
                }
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                if let Some(el) = stack.last_mut() {
                    let raw = t.decode().map_err(|e| xml_err(&reader, e.to_string()))?;
                    let s = quick_xml::escape::unescape(&raw)
                        .map_err(|e| xml_err(&reader, e.to_string()))?;
                    el.text.push_str(&s);
                }
            }
            Event::GeneralRef(r) => {
                if let Some(el) = stack.last_mut() {
                    let name = r.decode().map_err(|e| xml_err(&reader, e.to_string()))?;
                    let entity = format!("&{name};");
                    let s = quick_xml::escape::unescape(&entity)
                        .map_err(|e| xml_err(&reader, e.to_string()))?;
                    el.text.push_str(&s);
                }
            }
            Event::CData(c) => {
                if let Some(el) = stack.last_mut() {
                    let s = c.decode().map_err(|e| xml_err(&reader, e.to_string()))?;
                    el.text.push_str(&s);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(xml_err(&reader, "unexpected end of document"));
    }
    root.ok_or_else(|| xml_err(&reader, "no root element"))
}

fn parse_record(el: &Element) -> Result<MetadataRecord, String> {
    let kind = el.get("kind").ok_or("<meta> without kind")?;
    let id = el.get("id").ok_or("<meta> without id")?;
    let mut fields = object_value(el)?;
    fields.insert("kind".into(), Value::String(kind.into()));
    fields.insert("record_id".into(), Value::String(id.into()));
    serde_json::from_value(Value::Object(fields)).map_err(|e| format!("record {id}: {e}"))
}

fn required<'a>(el: &'a Element, key: &str) -> Result<&'a str, String> {
    el.get(key)
        .ok_or_else(|| format!("<{}> without {key} attribute", el.name))
}

fn parse_sentence(el: &Element, tagset: &Tagset) -> Result<Sentence, String> {
    let id = required(el, "id")?;
    let status: SentenceStatus = required(el, "status")?.parse()?;
    let text = required(el, "text")?;
    let mut tokens = Vec::with_capacity(el.children.len());
    for w in &el.children {
        if w.name != "w" {
            return Err(format!("unexpected <{}> in <s>", w.name));
        }
        let tag = match (w.get("tag"), w.get("prov")) {
            (None, None) => None,
            (Some(conv), Some(prov)) => {
                let provenance: Provenance = prov.parse()?;
                Some(
                    tagset
                        .assign_convention(conv, provenance)
                        .map_err(|e| e.to_string())?,
                )
            }
            _ => return Err(format!("<w> in {id} needs both tag and prov, or neither")),
        };
        tokens.push((w.text.clone(), tag));
    }
    Sentence::from_parts(id, text, tokens, status).map_err(|e| e.to_string())
}

/// Reads an export back into a corpus and the catalog records it embeds.
pub fn import_xml(text: &str, tagset: &Tagset) -> Result<(Corpus, Catalog), SerializationError> {
    let root = parse_tree(text)?;
    let err = |reason: String| SerializationError::Parse { line: 0, reason };
    if root.name != "corpus" {
        return Err(err(format!("root element is <{}>, expected <corpus>", root.name)));
    }
    let mut corpus = Corpus::new();
    let mut catalog = Catalog::new();
    for sub in &root.children {
        if sub.name != "subcorpus" {
            return Err(err(format!("unexpected <{}> in <corpus>", sub.name)));
        }
        let path: SubcorpusPath = required(sub, "path").map_err(err)?.parse().map_err(err)?;
        for child in &sub.children {
            match child.name.as_str() {
                "meta" => catalog.upsert(parse_record(child).map_err(err)?),
                "document" => {
                    let mut doc = Document::new(required(child, "id").map_err(err)?, path);
                    doc.metadata_ref = child.get("meta").map(String::from);
                    for el in &child.children {
                        match el.name.as_str() {
                            "meta" => catalog.upsert(parse_record(el).map_err(err)?),
                            "s" => doc.sentences.push(parse_sentence(el, tagset).map_err(err)?),
                            other => return Err(err(format!("unexpected <{other}> in <document>"))),
                        }
                    }
                    corpus.add_document(doc)?;
                }
                other => return Err(err(format!("unexpected <{other}> in <subcorpus>"))),
            }
        }
    }
    Ok((corpus, catalog))
}
