"""Rebuild south_german_credit.csv from the Statlog German Credit table.

The South German Credit release (UCI id 522) is the same 1,000 loans with
German column names and integer codes. This script applies that code book to
the text-labelled Statlog export (as shipped in scorecardpy's
data/germancredit.csv) so the corpus can be rebuilt offline:

    python3 make_south_german_credit.py germancredit.csv > south_german_credit.csv
"""

import csv
import sys

CODES = {
    "status_of_existing_checking_account": ("laufkont", {
        "no checking account": 1,
        "... < 0 DM": 2,
        "0 <= ... < 200 DM": 3,
        "... >= 200 DM / salary assignments for at least 1 year": 4,
    }),
    "duration_in_month": ("laufzeit", None),
    "credit_history": ("moral", {
        "delay in paying off in the past": 0,
        "critical account/ other credits existing (not at this bank)": 1,
        "no credits taken/ all credits paid back duly": 2,
        "existing credits paid back duly till now": 3,
        "all credits at this bank paid back duly": 4,
    }),
    "purpose": ("verw", {
        "others": 0,
        "car (new)": 1,
        "car (used)": 2,
        "furniture/equipment": 3,
        "radio/television": 4,
        "domestic appliances": 5,
        "repairs": 6,
        "education": 7,
        "vacation": 8,
        "retraining": 9,
        "business": 10,
    }),
    "credit_amount": ("hoehe", None),
    "savings_account_and_bonds": ("sparkont", {
        "unknown/ no savings account": 1,
        "... < 100 DM": 2,
        "100 <= ... < 500 DM": 3,
        "500 <= ... < 1000 DM": 4,
        "... >= 1000 DM": 5,
    }),
    "present_employment_since": ("beszeit", {
        "unemployed": 1,
        "... < 1 year": 2,
        "1 <= ... < 4 years": 3,
        "4 <= ... < 7 years": 4,
        "... >= 7 years": 5,
    }),
    "installment_rate_in_percentage_of_disposable_income": ("rate", None),
    "personal_status_and_sex": ("famges", {
        "male : divorced/separated": 1,
        "female : divorced/separated/married": 2,
        "male : single": 3,
        "male : married/widowed": 4,
    }),
    "other_debtors_or_guarantors": ("buerge", {
        "none": 1,
        "co-applicant": 2,
        "guarantor": 3,
    }),
    "present_residence_since": ("wohnzeit", None),
    "property": ("verm", {
        "unknown / no property": 1,
        "car or other, not in attribute Savings account/bonds": 2,
        "building society savings agreement/ life insurance": 3,
        "real estate": 4,
    }),
    "age_in_years": ("alter", None),
    "other_installment_plans": ("weitkred", {
        "bank": 1,
        "stores": 2,
        "none": 3,
    }),
    "housing": ("wohn", {
        "for free": 1,
        "rent": 2,
        "own": 3,
    }),
    "number_of_existing_credits_at_this_bank": ("bishkred", None),
    "job": ("beruf", {
        "unemployed/ unskilled - non-resident": 1,
        "unskilled - resident": 2,
        "skilled employee / official": 3,
        "management/ self-employed/ highly qualified employee/ officer": 4,
    }),
    "number_of_people_being_liable_to_provide_maintenance_for": ("pers", {
        "2": 1,
        "1": 2,
    }),
    "telephone": ("telef", {
        "none": 1,
        "yes, registered under the customers name": 2,
    }),
    "foreign_worker": ("gastarb", {
        "yes": 1,
        "no": 2,
    }),
    "creditability": ("kredit", {
        "bad": 0,
        "good": 1,
    }),
}


def main(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow([name for name, _ in CODES.values()])
    for row in rows:
        record = []
        for source, (_, table) in CODES.items():
            value = row[source].strip()
            record.append(table[value] if table else int(value))
        out.writerow(record)


if __name__ == "__main__":
    main(sys.argv[1])
