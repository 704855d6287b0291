//! GEXF 1.2 export of a retweet network for Gephi.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::community::CommunityPartition;
use crate::graph::{AccountRegistry, RetweetNetwork};
use crate::labeling::{ClusterLabeling, PartisanAssignment};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' && c != '\r' => {}
            c => out.push(c),
        }
    }
    out
}

/// Node attributes beyond the account id: community, its label and one
/// boolean column per partisan set.
pub struct GexfAnnotations<'a> {
    pub partition: Option<&'a CommunityPartition>,
    pub labeling: Option<&'a ClusterLabeling>,
    pub partisans: &'a [PartisanAssignment],
}

pub fn write_gexf<W: Write>(
    out: &mut W,
    net: &RetweetNetwork,
    registry: &AccountRegistry,
    notes: &GexfAnnotations<'_>,
) -> io::Result<()> {
    let mut doc = String::new();
    doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    doc.push_str("<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n");
    let _ = writeln!(
        doc,
        "  <meta>\n    <creator>hashjack</creator>\n    <description>retweet network {}</description>\n  </meta>",
        escape(&net.hashtag)
    );
    doc.push_str("  <graph mode=\"static\" defaultedgetype=\"directed\">\n");
    doc.push_str("    <attributes class=\"node\">\n");
    doc.push_str("      <attribute id=\"account\" title=\"account\" type=\"string\"/>\n");
    doc.push_str("      <attribute id=\"cluster\" title=\"cluster\" type=\"integer\"/>\n");
    doc.push_str("      <attribute id=\"label\" title=\"label\" type=\"string\"/>\n");
    for (i, p) in notes.partisans.iter().enumerate() {
        let _ = writeln!(
            doc,
            "      <attribute id=\"partisan{i}\" title=\"partisan {}\" type=\"boolean\"/>",
            escape(&p.party)
        );
    }
    doc.push_str("    </attributes>\n    <nodes>\n");
    for &node in net.nodes() {
        let name = escape(registry.name(node).unwrap_or_default());
        let _ = writeln!(doc, "      <node id=\"{node}\" label=\"{name}\">");
        doc.push_str("        <attvalues>\n");
        let _ = writeln!(doc, "          <attvalue for=\"account\" value=\"{name}\"/>");
        if let Some(c) = notes.partition.and_then(|p| p.community_of(node)) {
            let _ = writeln!(doc, "          <attvalue for=\"cluster\" value=\"{c}\"/>");
            if let Some(l) = notes.labeling {
                let _ = writeln!(doc, "          <attvalue for=\"label\" value=\"{}\"/>", l.label_of(c));
            }
        }
        for (i, p) in notes.partisans.iter().enumerate() {
            let _ = writeln!(
                doc,
                "          <attvalue for=\"partisan{i}\" value=\"{}\"/>",
                p.contains(node)
            );
        }
        doc.push_str("        </attvalues>\n      </node>\n");
    }
    doc.push_str("    </nodes>\n    <edges>\n");
    for (i, (u, v, w)) in net.edges().enumerate() {
        let _ = writeln!(
            doc,
            "      <edge id=\"{i}\" source=\"{u}\" target=\"{v}\" weight=\"{w}\"/>"
        );
    }
    doc.push_str("    </edges>\n  </graph>\n</gexf>\n");
    out.write_all(doc.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn gexf_contains_nodes_edges_and_flags() {
        let mut reg = AccountRegistry::new();
        let a = reg.intern("a&b");
        let b = reg.intern("c");
        let mut net = RetweetNetwork::empty("#afd");
        net.add_retweets(a, b, 2);
        let partition = CommunityPartition {
            network: "#afd".into(),
            seed: 1,
            resolution: 1.0,
            modularity: 0.0,
            levels: 1,
            level_modularity: vec![],
            assignment: BTreeMap::from([(a, 0), (b, 1)]),
        };
        let p = PartisanAssignment {
            party: "#afd".into(),
            members: [a].into(),
        };
        let mut buf = Vec::new();
        let notes = GexfAnnotations {
            partition: Some(&partition),
            labeling: None,
            partisans: std::slice::from_ref(&p),
        };
        write_gexf(&mut buf, &net, &reg, &notes).unwrap();
        let xml = String::from_utf8(buf).unwrap();
        assert!(xml.contains("version=\"1.2\""));
        assert!(xml.contains("label=\"a&amp;b\""));
        assert!(xml.contains("source=\"0\" target=\"1\" weight=\"2\""));
        assert!(xml.contains("<attvalue for=\"partisan0\" value=\"true\"/>"));
        assert!(xml.contains("<attvalue for=\"cluster\" value=\"1\"/>"));
        assert_eq!(xml.matches("<node ").count(), 2);
    }
}
