//! Financial antifragility φ: liquidity-to-expense ratio of a company and the
//! equal-weighted sector average.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhiError {
    #[error("operating expenses sum to zero; antifragility is undefined")]
    ZeroExpenses,
    #[error("sector has no constituents")]
    EmptySector,
    #[error("statement field `{field}` is invalid ({value})")]
    InvalidField { field: &'static str, value: f64 },
    #[error("sector average needs company-level values, got a sector value")]
    NotCompanyScope,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

/// The eleven balance-sheet and expense line items behind φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinancialStatement {
    pub inventories: f64,
    pub trade_receivables: f64,
    pub cash_equivalents: f64,
    pub other_current_assets: f64,
    pub current_debt: f64,
    pub trade_payable: f64,
    pub other_current_liabilities: f64,
    pub employment_cost: f64,
    pub financial_cost: f64,
    pub maintenance_operating_cost: f64,
    pub other_financial_cost: f64,
}

impl FinancialStatement {
    /// Inventories, receivables, cash and other current assets.
    pub fn current_assets(&self) -> f64 {
        self.inventories + self.trade_receivables + self.cash_equivalents + self.other_current_assets
    }

    /// Current debt, trade payables and other current liabilities.
    pub fn current_liabilities(&self) -> f64 {
        self.current_debt + self.trade_payable + self.other_current_liabilities
    }

    /// Employment, financial, maintenance/operating and other financial cost.
    pub fn operating_expenses(&self) -> f64 {
        self.employment_cost
            + self.financial_cost
            + self.maintenance_operating_cost
            + self.other_financial_cost
    }

    fn fields(&self) -> [(&'static str, f64, bool); 11] {
        [
            ("inventories", self.inventories, false),
            ("trade_receivables", self.trade_receivables, false),
            ("cash_equivalents", self.cash_equivalents, false),
            ("other_current_assets", self.other_current_assets, false),
            ("current_debt", self.current_debt, false),
            ("trade_payable", self.trade_payable, false),
            ("other_current_liabilities", self.other_current_liabilities, false),
            ("employment_cost", self.employment_cost, true),
            ("financial_cost", self.financial_cost, true),
            ("maintenance_operating_cost", self.maintenance_operating_cost, true),
            ("other_financial_cost", self.other_financial_cost, true),
        ]
    }

    /// All fields finite; expense fields non-negative. Asset and liability
    /// items may be negative (restatements).
    pub fn validate(&self) -> Result<(), PhiError> {
        for (field, value, is_expense) in self.fields() {
            if !value.is_finite() || (is_expense && value < 0.0) {
                return Err(PhiError::InvalidField { field, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiScope {
    Company,
    Sector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Antifragility {
    pub value: f64,
    pub scope: PhiScope,
    /// Number of companies averaged; 1 for company scope.
    pub constituents: usize,
}

impl Antifragility {
    pub fn company(value: f64) -> Self {
        Self { value, scope: PhiScope::Company, constituents: 1 }
    }
}

/// φ = (current assets − current liabilities) / operating expenses.
pub fn company_phi(statement: &FinancialStatement) -> Result<Antifragility, PhiError> {
    statement.validate()?;
    let expenses = statement.operating_expenses();
    if expenses == 0.0 {
        return Err(PhiError::ZeroExpenses);
    }
    let liquidity = statement.current_assets() - statement.current_liabilities();
    Ok(Antifragility::company(liquidity / expenses))
}

/// Equal-weighted mean of company φ values.
pub fn sector_phi(companies: &[Antifragility]) -> Result<Antifragility, PhiError> {
    if companies.is_empty() {
        return Err(PhiError::EmptySector);
    }
    if companies.iter().any(|c| c.scope != PhiScope::Company) {
        return Err(PhiError::NotCompanyScope);
    }
    let sum: f64 = companies.iter().map(|c| c.value).sum();
    Ok(Antifragility {
        value: sum / companies.len() as f64,
        scope: PhiScope::Sector,
        constituents: companies.len(),
    })
}

struct StatementRow {
    entity: String,
    statement: FinancialStatement,
}

/// Parses the `entity,inventories,…,other_financial_cost` statements file.
pub fn read_statements_csv<R: Read>(
    reader: R,
) -> Result<Vec<(String, FinancialStatement)>, PhiError> {
    const HEADER: [&str; 12] = [
        "entity",
        "inventories",
        "trade_receivables",
        "cash_equivalents",
        "other_current_assets",
        "current_debt",
        "trade_payable",
        "other_current_liabilities",
        "employment_cost",
        "financial_cost",
        "maintenance_operating_cost",
        "other_financial_cost",
    ];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| PhiError::Parse { line: 1, message: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(PhiError::Parse {
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| PhiError::Parse { line, message: e.to_string() })?;
        let parsed = parse_positional(&row).map_err(|message| PhiError::Parse { line, message })?;
        parsed
            .statement
            .validate()
            .map_err(|e| PhiError::Parse { line, message: e.to_string() })?;
        out.push((parsed.entity, parsed.statement));
    }
    Ok(out)
}

fn parse_positional(row: &csv::StringRecord) -> Result<StatementRow, String> {
    let num = |i: usize| -> Result<f64, String> {
        let raw = row.get(i).ok_or_else(|| format!("missing column {}", i + 1))?;
        raw.parse::<f64>().map_err(|e| format!("column {}: `{raw}`: {e}", i + 1))
    };
    if row.len() != 12 {
        return Err(format!("expected 12 columns, found {}", row.len()));
    }
    Ok(StatementRow {
        entity: row[0].to_string(),
        statement: FinancialStatement {
            inventories: num(1)?,
            trade_receivables: num(2)?,
            cash_equivalents: num(3)?,
            other_current_assets: num(4)?,
            current_debt: num(5)?,
            trade_payable: num(6)?,
            other_current_liabilities: num(7)?,
            employment_cost: num(8)?,
            financial_cost: num(9)?,
            maintenance_operating_cost: num(10)?,
            other_financial_cost: num(11)?,
        },
    })
}
