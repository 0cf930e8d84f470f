use std::io::{Read, Write};

use super::front::ConvexFront;
use super::point::Point2;
use super::GeometryError;

/// Writes the markers as `x,y` rows (17 significant digits).
pub fn write_front_csv<W: Write>(front: &ConvexFront, out: W) -> Result<(), GeometryError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| GeometryError::Csv(e.to_string());
    w.write_record(["x", "y"]).map_err(err)?;
    for p in front.markers() {
        w.write_record([format!("{:.16e}", p.x), format!("{:.16e}", p.y)])
            .map_err(err)?;
    }
    w.flush().map_err(|e| GeometryError::Csv(e.to_string()))
}

/// Reads an `x,y` marker file and validates it as a convex front.
pub fn read_front_csv<R: Read>(input: R) -> Result<ConvexFront, GeometryError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| GeometryError::Csv(e.to_string()))?;
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(GeometryError::Csv(format!("expected header `x,y`, got {headers:?}")));
    }
    let mut markers = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| GeometryError::Csv(e.to_string()))?;
        let field = |k: usize| -> Result<f64, GeometryError> {
            rec.get(k)
                .ok_or_else(|| GeometryError::Csv(format!("row {}: missing column", row + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| GeometryError::Csv(format!("row {}: {e}", row + 1)))
        };
        markers.push(Point2::new(field(0)?, field(1)?));
    }
    ConvexFront::new(markers)
}
