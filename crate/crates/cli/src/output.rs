use std::io::{self, Write};

use serde::ser::{Serialize, SerializeMap, Serializer};
use watkins_core::watkins::TwistCertificate;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flat output row: ordered string fields, `None` printed as JSON `null`
/// or an empty CSV cell.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Record(pub Vec<(&'static str, Option<String>)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &'static str, value: impl ToString) -> Self {
        self.0.push((key, Some(value.to_string())));
        self
    }

    pub fn opt(mut self, key: &'static str, value: Option<impl ToString>) -> Self {
        self.0.push((key, value.map(|v| v.to_string())));
        self
    }

    pub fn keys(&self) -> Vec<&'static str> {
        self.0.iter().map(|(k, _)| *k).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// JSON lines, or a CSV header (taken from the first record) and rows.
pub fn write_records(out: &mut dyn Write, format: Format, records: &[Record]) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                writeln!(out, "{}", r.to_json())?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.keys()).map_err(csv_err)?;
            }
            for r in records {
                w.write_record(r.0.iter().map(|(_, v)| v.as_deref().unwrap_or(""))).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Streams certificates as JSON lines or CSV rows.
pub struct CertificateWriter<'a> {
    inner: Inner<'a>,
}

enum Inner<'a> {
    Json(&'a mut dyn Write),
    Csv(Box<csv::Writer<&'a mut dyn Write>>),
}

impl<'a> CertificateWriter<'a> {
    pub fn new(out: &'a mut dyn Write, format: Format) -> io::Result<Self> {
        let inner = match format {
            Format::Json => Inner::Json(out),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(TwistCertificate::CSV_HEADER).map_err(csv_err)?;
                Inner::Csv(Box::new(w))
            }
        };
        Ok(Self { inner })
    }

    pub fn write(&mut self, cert: &TwistCertificate) -> io::Result<()> {
        match &mut self.inner {
            Inner::Json(out) => writeln!(out, "{}", cert.to_json()),
            Inner::Csv(w) => w.write_record(cert.csv_record()).map_err(csv_err),
        }
    }

    pub fn finish(self) -> io::Result<()> {
        match self.inner {
            Inner::Json(out) => out.flush(),
            Inner::Csv(mut w) => w.flush(),
        }
    }
}
