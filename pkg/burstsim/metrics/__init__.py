from .records import (
    JobRecord,
    RECORD_COLUMNS,
    collect,
    records_to_frame,
    write_records_csv,
    summary,
    vm_seconds,
)
from .reports import (
    BinnedWaitReport,
    binned_wait_report,
    comparison_report,
    format_decimal,
    policy_table,
    tts_reduction,
)
