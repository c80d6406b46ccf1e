//! Linear diagrams (boxed 2-descents, 2-inversion arcs) and planar diagrams
//! (slopes with encircled exceedances), as SVG or ASCII.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::stats::{descent_set, exceedance_set, two_descent_set, two_inversion_set};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramKind {
    Linear,
    Planar,
}

impl FromStr for DiagramKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(DiagramKind::Linear),
            "planar" => Ok(DiagramKind::Planar),
            _ => Err(Error::UnknownToken { what: "diagram kind", token: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Svg,
    Ascii,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svg" => Ok(Format::Svg),
            "ascii" => Ok(Format::Ascii),
            _ => Err(Error::UnknownToken { what: "format", token: s.into() }),
        }
    }
}

/// Drawing primitive on the integer grid; `x` is the 1-based position and
/// `y` the height level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Element {
    Vertex { x: usize, y: usize, label: usize, circled: bool },
    /// Box around the vertex at `x`.
    Box { x: usize, y: usize },
    /// Arc from the vertex at `from` to the vertex at `to`.
    Arc { from: usize, to: usize },
    Slope { x1: usize, y1: usize, x2: usize, y2: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub kind: DiagramKind,
    pub elements: Vec<Element>,
}

impl Diagram {
    pub fn vertices(&self) -> impl Iterator<Item = (usize, usize, usize, bool)> + '_ {
        self.elements.iter().filter_map(|e| match *e {
            Element::Vertex { x, y, label, circled } => Some((x, y, label, circled)),
            _ => None,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::Arc { .. })).count()
    }

    pub fn box_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::Box { .. })).count()
    }

    pub fn circled_count(&self) -> usize {
        self.vertices().filter(|v| v.3).count()
    }

    pub fn slope_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::Slope { .. })).count()
    }

    fn width(&self) -> usize {
        self.vertices().map(|v| v.0).max().unwrap_or(0)
    }

    fn height(&self) -> usize {
        self.vertices().map(|v| v.1).max().unwrap_or(0)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Svg => self.to_svg(),
            Format::Ascii => self.to_ascii(),
        }
    }

    pub fn to_svg(&self) -> String {
        const U: usize = 40;
        let n = self.width();
        let arc_room = match self.kind {
            DiagramKind::Linear => U / 2 * n,
            DiagramKind::Planar => 0,
        };
        let w = U * (n + 1);
        let h = U * (self.height() + 2) + arc_room;
        let px = |x: usize| U * x;
        let py = |y: usize| h - U * (y + 1);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        for e in &self.elements {
            let _ = match *e {
                Element::Slope { x1, y1, x2, y2 } => writeln!(
                    s,
                    r#"  <line class="slope" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
                    px(x1),
                    py(y1),
                    px(x2),
                    py(y2)
                ),
                Element::Arc { from, to } => {
                    let rx = (px(to) - px(from)) / 2;
                    let ry = rx.min(arc_room.max(U));
                    writeln!(
                        s,
                        r#"  <path class="two-inversion" d="M {} {} A {rx} {ry} 0 0 1 {} {}" fill="none" stroke="black"/>"#,
                        px(from),
                        py(0) - 8,
                        px(to),
                        py(0) - 8
                    )
                }
                Element::Box { x, y } => writeln!(
                    s,
                    r#"  <rect class="two-descent" x="{}" y="{}" width="24" height="24" fill="none" stroke="black"/>"#,
                    px(x) - 12,
                    py(y) - 12
                ),
                Element::Vertex { x, y, label, circled } => {
                    let (cx, cy) = (px(x), py(y));
                    let _ = writeln!(s, r#"  <circle class="vertex" cx="{cx}" cy="{cy}" r="3"/>"#);
                    if circled {
                        let _ = writeln!(
                            s,
                            r#"  <circle class="exceedance" cx="{cx}" cy="{cy}" r="14" fill="none" stroke="black"/>"#
                        );
                    }
                    writeln!(
                        s,
                        r#"  <text class="label" x="{}" y="{}" font-size="12">{label}</text>"#,
                        cx + 5,
                        cy + 16
                    )
                }
            };
        }
        s.push_str("</svg>\n");
        s
    }

    /// Fixed grid of 3 rows per height level; vertices get one column cell
    /// each, so digits read left to right spell the word.
    pub fn to_ascii(&self) -> String {
        let n = self.width();
        let cw = self.vertices().map(|v| v.2.to_string().len()).max().unwrap_or(1) + 2;
        let col = |x: usize| (x - 1) * (cw + 1);
        let line_len = col(n) + cw;
        let arcs: Vec<(usize, usize)> = self
            .elements
            .iter()
            .filter_map(|e| match *e {
                Element::Arc { from, to } => Some((from, to)),
                _ => None,
            })
            .collect();
        let levels = self.height() + 1;
        let mut grid = vec![vec![' '; line_len]; arcs.len() + 3 * levels - 2];
        let row_of = |y: usize| arcs.len() + 3 * (levels - 1 - y);
        for (r, &(a, b)) in arcs.iter().enumerate() {
            let (ca, cb) = (col(a) + cw / 2, col(b) + cw / 2);
            grid[r][ca..=cb].fill('-');
            grid[r][ca] = '+';
            grid[r][cb] = '+';
        }
        let boxed: Vec<usize> = self
            .elements
            .iter()
            .filter_map(|e| match *e {
                Element::Box { x, .. } => Some(x),
                _ => None,
            })
            .collect();
        for (x, y, label, circled) in self.vertices() {
            let (open, close) = if circled {
                ('(', ')')
            } else if boxed.contains(&x) {
                ('[', ']')
            } else {
                (' ', ' ')
            };
            let text = format!("{open}{label:^w$}{close}", w = cw - 2);
            for (k, ch) in text.chars().enumerate() {
                grid[row_of(y)][col(x) + k] = ch;
            }
        }
        for e in &self.elements {
            if let Element::Slope { x1, y1, y2, .. } = *e {
                let gap = col(x1) + cw;
                let (top, glyph) = if y2 > y1 { (row_of(y2), '/') } else { (row_of(y1), '\\') };
                grid[top + 1][gap] = glyph;
                grid[top + 2][gap] = glyph;
            }
        }
        let mut s = String::new();
        for row in grid {
            s.push_str(row.iter().collect::<String>().trim_end());
            s.push('\n');
        }
        s
    }
}

/// Vertices `σ(1) … σ(n)` left to right, `σ(k)` boxed for `k ∈ DES₂`, one arc
/// per 2-inversion.
pub fn linear_diagram(p: &Permutation) -> Diagram {
    let mut elements: Vec<Element> = (1..=p.len())
        .map(|x| Element::Vertex { x, y: 0, label: p.at(x), circled: false })
        .collect();
    elements.extend(two_descent_set(p).into_iter().map(|x| Element::Box { x, y: 0 }));
    elements.extend(
        two_inversion_set(p).pairs.into_iter().map(|(from, to)| Element::Arc { from, to }),
    );
    Diagram { kind: DiagramKind::Linear, elements }
}

/// Vertex `i` shows `τ(i)` on a slope that climbs at ascents and falls at
/// descents; exceedance positions are encircled. Heights count steps along
/// the slopes, shifted so the lowest vertex sits at level 0.
pub fn planar_diagram(t: &Permutation) -> Diagram {
    let n = t.len();
    let des = descent_set(t);
    let mut h: Vec<i64> = vec![0; n + 1];
    for i in 1..n {
        h[i + 1] = h[i] + if des.contains(&i) { -1 } else { 1 };
    }
    let lo = h[1..].iter().copied().min().unwrap_or(0);
    let y = |i: usize| (h[i] - lo) as usize;
    let exc = exceedance_set(t);
    let mut elements: Vec<Element> = (1..n)
        .map(|i| Element::Slope { x1: i, y1: y(i), x2: i + 1, y2: y(i + 1) })
        .collect();
    elements.extend(
        (1..=n).map(|x| Element::Vertex { x, y: y(x), label: t.at(x), circled: exc.contains(&x) }),
    );
    Diagram { kind: DiagramKind::Planar, elements }
}

pub fn diagram(p: &Permutation, kind: DiagramKind) -> Diagram {
    match kind {
        DiagramKind::Linear => linear_diagram(p),
        DiagramKind::Planar => planar_diagram(p),
    }
}

pub fn render_linear(p: &Permutation, format: &str) -> Result<String> {
    Ok(linear_diagram(p).render(format.parse()?))
}

pub fn render_planar(t: &Permutation, format: &str) -> Result<String> {
    Ok(planar_diagram(t).render(format.parse()?))
}

/// Numeric labels of an ASCII diagram in left-to-right column order.
pub fn ascii_labels(doc: &str) -> Vec<usize> {
    let mut found: Vec<(usize, usize)> = Vec::new();
    for line in doc.lines() {
        let chars: Vec<char> = line.chars().collect();
        let mut c = 0;
        while c < chars.len() {
            if chars[c].is_ascii_digit() {
                let start = c;
                while c < chars.len() && chars[c].is_ascii_digit() {
                    c += 1;
                }
                let text: String = chars[start..c].iter().collect();
                found.push((start, text.parse().expect("digit run")));
            } else {
                c += 1;
            }
        }
    }
    found.sort_unstable();
    found.into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn linear_counts() {
        let d = linear_diagram(&p("34251"));
        assert_eq!((d.arc_count(), d.box_count()), (2, 2));
        let d = linear_diagram(&p("12345"));
        assert_eq!((d.arc_count(), d.box_count()), (0, 0));
        let d = linear_diagram(&p("425736981"));
        assert_eq!((d.arc_count(), d.box_count()), (4, 3));
    }

    #[test]
    fn planar_counts_and_slopes() {
        let d = planar_diagram(&p("32541"));
        assert_eq!(d.circled_count(), 2);
        let ys: Vec<usize> = d.vertices().map(|v| v.1).collect();
        assert_eq!(ys, vec![2, 1, 2, 1, 0]);
        let d = planar_diagram(&p("1234"));
        assert_eq!(d.circled_count(), 0);
        assert_eq!(d.vertices().map(|v| v.1).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(planar_diagram(&p("956382471")).circled_count(), 4);
    }

    #[test]
    fn ascii_recovers_word() {
        for s in ["34251", "956382471", "1", "21"] {
            let q = p(s);
            for kind in [DiagramKind::Linear, DiagramKind::Planar] {
                let doc = diagram(&q, kind).to_ascii();
                assert_eq!(ascii_labels(&doc), q.word(), "{kind:?}\n{doc}");
            }
        }
        let long: Permutation = "10,2,11,1,3,4,5,6,7,8,9".parse().unwrap();
        assert_eq!(ascii_labels(&linear_diagram(&long).to_ascii()), long.word());
    }

    #[test]
    fn ascii_shapes() {
        assert_eq!(linear_diagram(&p("21")).to_ascii(), " +---+\n 2   1\n");
        assert_eq!(planar_diagram(&p("21")).to_ascii(), "(2)\n   \\\n   \\\n     1\n");
    }

    #[test]
    fn svg_element_classes() {
        let svg = render_linear(&p("425736981"), "svg").unwrap();
        assert_eq!(svg.matches("class=\"two-inversion\"").count(), 4);
        assert_eq!(svg.matches("class=\"two-descent\"").count(), 3);
        let svg = render_planar(&p("956382471"), "svg").unwrap();
        assert_eq!(svg.matches("class=\"exceedance\"").count(), 4);
        assert!(render_linear(&p("21"), "png").is_err());
    }
}
