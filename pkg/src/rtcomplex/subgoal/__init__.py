from .compress import chain_certificate, compress_path
from .dlrta import DlrtaDatabase, build_dlrta_db, clique_abstraction, solve_dlrta
from .hcdps import (HcdpsDatabase, HcdpsRecord, build_hcdps_db, hc_partition,
                    region_adjacency, solve_hcdps)
from .knn import (DatabaseBuildError, KnnDatabase, KnnRecord, build_knn_db, rank_records,
                  select_record, solve_knn)

__all__ = [
    "DatabaseBuildError", "DlrtaDatabase", "HcdpsDatabase", "HcdpsRecord", "KnnDatabase",
    "KnnRecord", "build_dlrta_db", "build_hcdps_db", "build_knn_db", "chain_certificate",
    "clique_abstraction", "compress_path", "hc_partition", "rank_records", "region_adjacency",
    "select_record", "solve_dlrta", "solve_hcdps", "solve_knn",
]
